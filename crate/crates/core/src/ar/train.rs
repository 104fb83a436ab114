//! Loss, batches and the optimisation loop.

use ndarray::{Array2, ArrayView2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::model::LOSS_CLIP;
use super::{AblationVariant, ArDecoder};
use crate::channel::transmit;
use crate::code::ParityCheckCode;
use crate::error::Result;
use crate::nn::AdamState;

/// Per-frame cross-entropy summed over iterations:
/// `−(1/n) Σ_h Σ_v [c_v ln o_v^h + (1 − c_v) ln(1 − o_v^h)]`.
pub fn loss(o_history: &[Vec<f64>], truth: &[u8]) -> f64 {
    let n = truth.len() as f64;
    let mut total = 0.0;
    for o in o_history {
        assert_eq!(o.len(), truth.len());
        for (&ov, &c) in o.iter().zip(truth) {
            total += bce(ov, f64::from(c));
        }
    }
    total / n
}

#[inline]
fn bce(o: f64, c: f64) -> f64 {
    let o = o.clamp(LOSS_CLIP, 1.0 - LOSS_CLIP);
    -(c * o.ln() + (1.0 - c) * (1.0 - o).ln())
}

/// [`loss`] averaged over the frames (rows) of a batch.
pub fn batch_loss(o_history: &[Array2<f64>], truth: ArrayView2<f64>) -> f64 {
    let (batch, n) = truth.dim();
    let mut total = 0.0;
    for o in o_history {
        for (&ov, &c) in o.iter().zip(truth.iter()) {
            total += bce(ov, c);
        }
    }
    total / (n * batch) as f64
}

/// Frames per SNR point; the batch is the concatenation over `snrs_db`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SnrSchedule {
    pub snrs_db: Vec<f64>,
    pub per_snr: usize,
}

impl Default for SnrSchedule {
    /// 15 frames at each of 1..8 dB, 120 in total.
    fn default() -> Self {
        Self {
            snrs_db: (1..=8).map(f64::from).collect(),
            per_snr: 15,
        }
    }
}

impl SnrSchedule {
    pub fn batch_size(&self) -> usize {
        self.snrs_db.len() * self.per_snr
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Batch {
    pub llr: Array2<f64>,
    /// Transmitted bits as 0.0 / 1.0.
    pub truth: Array2<f64>,
}

impl Batch {
    /// Random (or all-zero) codewords transmitted at the scheduled SNRs.
    pub fn generate<R: Rng + ?Sized>(
        code: &ParityCheckCode,
        schedule: &SnrSchedule,
        zero_codeword: bool,
        rng: &mut R,
    ) -> Self {
        let n = code.n();
        let size = schedule.batch_size();
        let mut llr = Array2::zeros((size, n));
        let mut truth = Array2::zeros((size, n));
        let mut row = 0;
        for &snr in &schedule.snrs_db {
            for _ in 0..schedule.per_snr {
                let info: Vec<u8> = if zero_codeword {
                    vec![0; code.k()]
                } else {
                    (0..code.k()).map(|_| rng.gen_range(0..2)).collect()
                };
                let cw = code.encode(&info);
                let frame = transmit(&cw, snr, code.rate(), rng);
                for v in 0..n {
                    llr[[row, v]] = frame.llr[v];
                    truth[[row, v]] = f64::from(cw[v]);
                }
                row += 1;
            }
        }
        Self { llr, truth }
    }
}

/// One Adam state per parameter group.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OptimState {
    pub theta_f: AdamState,
    pub lut_snr: AdamState,
    pub c: AdamState,
    pub w_bar: AdamState,
}

impl OptimState {
    pub fn new(model: &ArDecoder, lr: f64) -> Self {
        let p = &model.params;
        Self {
            theta_f: AdamState::new(p.theta_f.values.len(), lr),
            lut_snr: AdamState::new(p.lut_snr.len(), lr),
            c: AdamState::new(p.c.len(), lr),
            w_bar: AdamState::new(p.w_bar.len(), lr),
        }
    }
}

/// Model, optimiser and data stream. Batch `t` is drawn from a generator
/// seeded by `(seed, stream = t)`, so a resumed run sees the same data.
#[derive(Clone, Debug)]
pub struct Trainer {
    pub model: ArDecoder,
    pub optim: OptimState,
    pub schedule: SnrSchedule,
    pub seed: u64,
    pub step: u64,
}

impl Trainer {
    /// Parameters are initialised from `seed` alone, so every variant
    /// trained with the same seed starts from identical weights.
    pub fn new(code: ParityCheckCode, config: super::ArConfig, variant: AblationVariant, seed: u64) -> Result<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let lr = config.lr;
        let model = ArDecoder::new(code, config, variant, &mut rng)?;
        let optim = OptimState::new(&model, lr);
        Ok(Self {
            model,
            optim,
            schedule: SnrSchedule::default(),
            seed,
            step: 0,
        })
    }

    pub fn batch_for_step(&self, step: u64) -> Batch {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(step + 1);
        let zero = self.model.variant() == AblationVariant::ZeroCodeword;
        Batch::generate(self.model.code(), &self.schedule, zero, &mut rng)
    }

    /// Loss of the current parameters on a batch, without updating.
    pub fn evaluate_loss(&self, batch: &Batch) -> Result<f64> {
        let pass = self.model.forward(batch.llr.view(), self.model.train_rule(), false)?;
        Ok(batch_loss(&pass.o_history, batch.truth.view()))
    }

    /// Forward, backward and one Adam step per group. Returns the batch loss
    /// before the update.
    pub fn train_on(&mut self, batch: &Batch) -> Result<f64> {
        let model = &mut self.model;
        let pass = model.forward(batch.llr.view(), model.train_rule(), true)?;
        let loss = batch_loss(&pass.o_history, batch.truth.view());
        let grads = model.backward(batch.llr.view(), batch.truth.view(), &pass)?;
        let p = &mut model.params;
        self.optim.theta_f.step(&mut p.theta_f.values, &grads.theta_f);
        self.optim.lut_snr.step(&mut p.lut_snr, &grads.lut_snr);
        self.optim.c.step(&mut p.c, &grads.c);
        self.optim.w_bar.step(&mut p.w_bar, &grads.w_bar);
        Ok(loss)
    }

    /// Draws the next scheduled batch and trains on it.
    pub fn step(&mut self) -> Result<f64> {
        let batch = self.batch_for_step(self.step);
        let loss = self.train_on(&batch)?;
        self.step += 1;
        Ok(loss)
    }
}
