//! Monte Carlo BER evaluation, training and ablation drivers, the
//! complexity model and the symmetry probe.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::ar::{AblationVariant, ArConfig, ArDecoder, Checkpoint, Trainer};
use crate::bp::{decode_bp, BpConfig, CheckRule};
use crate::channel::transmit;
use crate::code::ParityCheckCode;
use crate::error::{Error, Result};
use crate::graph::EdgeGraph;
use crate::oracles::{enumerate_codebook, exact_map, Codebook};

/// Version of the CSV column layout.
pub const CSV_SCHEMA_VERSION: u32 = 1;

pub const CSV_HEADER: &str =
    "schema_version,decoder,code,n,snr_db,frames_run,bit_errors,frame_errors,ber,neg_ln_ber,iters,taylor_q,seed,variant";

pub enum DecoderSpec {
    Bp(BpConfig),
    ArHyper(Box<ArDecoder>),
    MapOracle(Codebook),
}

impl DecoderSpec {
    pub fn bp(iterations: usize) -> Self {
        DecoderSpec::Bp(BpConfig {
            iterations,
            ..BpConfig::default()
        })
    }

    pub fn map_oracle(code: &ParityCheckCode) -> Result<Self> {
        Ok(DecoderSpec::MapOracle(enumerate_codebook(code)?))
    }

    pub fn name(&self) -> &'static str {
        match self {
            DecoderSpec::Bp(_) => "bp",
            DecoderSpec::ArHyper(_) => "ar-hyper",
            DecoderSpec::MapOracle(_) => "map-oracle",
        }
    }

    fn iterations(&self) -> usize {
        match self {
            DecoderSpec::Bp(c) => c.iterations,
            DecoderSpec::ArHyper(m) => m.config().iterations,
            DecoderSpec::MapOracle(_) => 0,
        }
    }

    fn taylor_q(&self) -> Option<usize> {
        match self {
            DecoderSpec::Bp(BpConfig {
                rule: CheckRule::Taylor(q),
                ..
            }) => Some(*q),
            DecoderSpec::ArHyper(m) => Some(m.config().taylor_q),
            _ => None,
        }
    }

    fn variant(&self) -> Option<AblationVariant> {
        match self {
            DecoderSpec::ArHyper(m) => Some(m.variant()),
            _ => None,
        }
    }

    fn check_code(&self, code: &ParityCheckCode) -> Result<()> {
        match self {
            DecoderSpec::ArHyper(m) => {
                let g = EdgeGraph::build(code.parity_check())?;
                if g.fingerprint() != m.graph().fingerprint() || m.code().k() != code.k() {
                    return Err(Error::FingerprintMismatch(format!(
                        "decoder was built for {}, not {}",
                        m.code().name(),
                        code.name()
                    )));
                }
            }
            DecoderSpec::MapOracle(cb) => {
                if cb.n() != code.n() || cb.len() != 1 << code.k() {
                    return Err(Error::Shape("codebook does not belong to this code".into()));
                }
            }
            DecoderSpec::Bp(_) => {}
        }
        Ok(())
    }

    /// Decodes the rows of `llr`.
    fn decode_chunk(&self, graph: &EdgeGraph, llr: &Array2<f64>) -> Result<Vec<Vec<u8>>> {
        match self {
            DecoderSpec::Bp(cfg) => Ok(llr
                .rows()
                .into_iter()
                .map(|row| decode_bp(row.as_slice().unwrap(), graph, *cfg).bits)
                .collect()),
            DecoderSpec::ArHyper(m) => Ok(m.forward(llr.view(), m.eval_rule(), false)?.bits),
            DecoderSpec::MapOracle(cb) => Ok(llr
                .rows()
                .into_iter()
                .map(|row| exact_map(row.as_slice().unwrap(), cb))
                .collect()),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BerConfig {
    pub snrs_db: Vec<f64>,
    pub min_errors: u64,
    pub max_frames: u64,
    pub seed: u64,
    pub workers: usize,
    /// Frames per worker per round.
    pub chunk: usize,
}

impl Default for BerConfig {
    fn default() -> Self {
        Self {
            snrs_db: vec![4.0, 5.0, 6.0],
            min_errors: 500,
            max_frames: 10_000_000,
            seed: 0,
            workers: 1,
            chunk: 100,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BerPoint {
    pub decoder: String,
    pub code: String,
    pub n: usize,
    pub snr_db: f64,
    pub frames_run: u64,
    pub bit_errors: u64,
    pub frame_errors: u64,
    pub ber: f64,
    /// `None` when no bit error was observed.
    pub neg_ln_ber: Option<f64>,
    pub iters: usize,
    pub taylor_q: Option<usize>,
    pub seed: u64,
    pub variant: Option<AblationVariant>,
    pub wall_time_s: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BerReport {
    pub schema_version: u32,
    pub points: Vec<BerPoint>,
}

impl BerReport {
    pub fn new(points: Vec<BerPoint>) -> Self {
        Self {
            schema_version: CSV_SCHEMA_VERSION,
            points,
        }
    }

    /// Deterministic CSV; wall-clock time lives only in the JSON mirror.
    pub fn to_csv(&self) -> String {
        let mut out = String::from(CSV_HEADER);
        out.push('\n');
        for p in &self.points {
            let opt = |x: Option<String>| x.unwrap_or_default();
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
                self.schema_version,
                p.decoder,
                p.code,
                p.n,
                p.snr_db,
                p.frames_run,
                p.bit_errors,
                p.frame_errors,
                p.ber,
                opt(p.neg_ln_ber.map(|x| x.to_string())),
                p.iters,
                opt(p.taylor_q.map(|x| x.to_string())),
                p.seed,
                opt(p.variant.map(|x| x.to_string())),
            );
        }
        out
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// Writes CSV, or JSON when the path ends in `.json`.
    pub fn write(&self, path: &Path) -> Result<()> {
        let body = if path.extension().is_some_and(|e| e == "json") {
            self.to_json()?
        } else {
            self.to_csv()
        };
        write_file(path, &body)
    }
}

fn write_file(path: &Path, body: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    fs::write(path, body)?;
    Ok(())
}

/// Generates `count` random codewords and their LLRs at `snr_db`.
fn draw_frames<R: Rng>(code: &ParityCheckCode, snr_db: f64, count: usize, rng: &mut R) -> (Array2<f64>, Vec<Vec<u8>>) {
    let n = code.n();
    let mut llr = Array2::zeros((count, n));
    let mut truth = Vec::with_capacity(count);
    for b in 0..count {
        let info: Vec<u8> = (0..code.k()).map(|_| rng.gen_range(0..2)).collect();
        let cw = code.encode(&info);
        let frame = transmit(&cw, snr_db, code.rate(), rng);
        llr.row_mut(b).as_slice_mut().unwrap().copy_from_slice(&frame.llr);
        truth.push(cw);
    }
    (llr, truth)
}

/// Counts errors over rounds of `workers × chunk` frames until
/// `min_errors` bit errors or `max_frames` frames. Worker `w` draws from
/// a generator seeded `seed + w` (stream = SNR position), so results depend
/// only on the seed, the configuration and the worker count.
pub fn run_ber(decoder: &DecoderSpec, code: &ParityCheckCode, config: &BerConfig) -> Result<BerReport> {
    if config.workers == 0 || config.chunk == 0 {
        return Err(Error::Config("workers and chunk size must be positive".into()));
    }
    decoder.check_code(code)?;
    let graph = EdgeGraph::build(code.parity_check())?;
    let n = code.n();
    let mut points = Vec::with_capacity(config.snrs_db.len());
    for (si, &snr) in config.snrs_db.iter().enumerate() {
        let start = Instant::now();
        let mut rngs: Vec<ChaCha8Rng> = (0..config.workers)
            .map(|w| {
                let mut r = ChaCha8Rng::seed_from_u64(config.seed.wrapping_add(w as u64));
                r.set_stream(si as u64);
                r
            })
            .collect();
        let (mut frames, mut bit_errors, mut frame_errors) = (0u64, 0u64, 0u64);
        while bit_errors < config.min_errors && frames < config.max_frames {
            let remaining = config.max_frames - frames;
            let sizes: Vec<usize> = (0..config.workers as u64)
                .map(|w| {
                    let share = remaining / config.workers as u64 + u64::from(w < remaining % config.workers as u64);
                    share.min(config.chunk as u64) as usize
                })
                .collect();
            let results: Vec<Result<(u64, u64, u64)>> = std::thread::scope(|scope| {
                let handles: Vec<_> = rngs
                    .iter_mut()
                    .zip(&sizes)
                    .filter(|(_, &s)| s > 0)
                    .map(|(rng, &size)| {
                        let graph = &graph;
                        scope.spawn(move || -> Result<(u64, u64, u64)> {
                            let (llr, truth) = draw_frames(code, snr, size, rng);
                            let decoded = decoder.decode_chunk(graph, &llr)?;
                            let mut be = 0u64;
                            let mut fe = 0u64;
                            for (d, t) in decoded.iter().zip(&truth) {
                                let e = d.iter().zip(t).filter(|(a, b)| a != b).count() as u64;
                                be += e;
                                fe += u64::from(e > 0);
                            }
                            Ok((size as u64, be, fe))
                        })
                    })
                    .collect();
                handles.into_iter().map(|h| h.join().expect("BER worker panicked")).collect()
            });
            for r in results {
                let (f, be, fe) = r?;
                frames += f;
                bit_errors += be;
                frame_errors += fe;
            }
        }
        let ber = bit_errors as f64 / (frames as f64 * n as f64);
        points.push(BerPoint {
            decoder: decoder.name().to_string(),
            code: code.name().to_string(),
            n,
            snr_db: snr,
            frames_run: frames,
            bit_errors,
            frame_errors,
            ber,
            neg_ln_ber: (bit_errors > 0).then(|| -ber.ln()),
            iters: decoder.iterations(),
            taylor_q: decoder.taylor_q(),
            seed: config.seed,
            variant: decoder.variant(),
            wall_time_s: start.elapsed().as_secs_f64(),
        });
    }
    Ok(BerReport::new(points))
}

#[derive(Clone, Debug)]
pub struct TrainOptions {
    pub steps: u64,
    pub seed: u64,
    pub variant: AblationVariant,
    pub config: ArConfig,
    pub checkpoint: PathBuf,
    /// Save every this many steps (and always at the end); 0 = only at the end.
    pub checkpoint_every: u64,
    /// Continue from `checkpoint` if it exists.
    pub resume: bool,
}

#[derive(Clone, Debug)]
pub struct TrainOutcome {
    pub trainer: Trainer,
    /// `(step, loss)` for the steps run by this call.
    pub losses: Vec<(u64, f64)>,
}

/// Trains until the trainer has taken `steps` steps in total.
pub fn run_training(code: &ParityCheckCode, opts: &TrainOptions) -> Result<TrainOutcome> {
    let mut trainer = if opts.resume && opts.checkpoint.exists() {
        let tr = Checkpoint::load(&opts.checkpoint)?.into_trainer(code.clone())?;
        if tr.model.variant() != opts.variant || tr.seed != opts.seed {
            return Err(Error::Checkpoint("checkpoint variant or seed differs from the request".into()));
        }
        tr
    } else {
        Trainer::new(code.clone(), opts.config.clone(), opts.variant, opts.seed)?
    };
    let mut losses = Vec::new();
    while trainer.step < opts.steps {
        let step = trainer.step;
        let loss = trainer.step()?;
        losses.push((step, loss));
        log::debug!("step {step} loss {loss:.6}");
        if trainer.step % 100 == 0 {
            let recent = &losses[losses.len().saturating_sub(100)..];
            let mean = recent.iter().map(|x| x.1).sum::<f64>() / recent.len() as f64;
            log::info!("step {} mean loss {mean:.5}", trainer.step);
        }
        if opts.checkpoint_every > 0 && trainer.step % opts.checkpoint_every == 0 {
            Checkpoint::from_trainer(&trainer).save(&opts.checkpoint)?;
        }
    }
    Checkpoint::from_trainer(&trainer).save(&opts.checkpoint)?;
    Ok(TrainOutcome { trainer, losses })
}

pub fn loss_curve_csv(losses: &[(u64, f64)]) -> String {
    let mut out = String::from("step,loss\n");
    for (s, l) in losses {
        let _ = writeln!(out, "{s},{l}");
    }
    out
}

/// Appends to an existing loss curve (as when resuming) or starts a new one.
pub fn write_loss_curve(path: &Path, losses: &[(u64, f64)], append: bool) -> Result<()> {
    if append && path.exists() {
        let mut body = fs::read_to_string(path)?;
        for (s, l) in losses {
            let _ = writeln!(body, "{s},{l}");
        }
        write_file(path, &body)
    } else {
        write_file(path, &loss_curve_csv(losses))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AblationRow {
    pub variant: AblationVariant,
    pub initial_loss: f64,
    pub final_loss: f64,
    pub points: Vec<BerPoint>,
}

/// Trains every variant from the same seed and evaluates each on the same
/// noise realisations.
pub fn run_ablation(
    code: &ParityCheckCode,
    variants: &[AblationVariant],
    steps: u64,
    config: &ArConfig,
    seed: u64,
    eval: &BerConfig,
    checkpoint_dir: &Path,
) -> Result<Vec<AblationRow>> {
    let mut rows = Vec::with_capacity(variants.len());
    for &variant in variants {
        let opts = TrainOptions {
            steps,
            seed,
            variant,
            config: config.clone(),
            checkpoint: checkpoint_dir.join(format!("{}-{variant}.json", code.name())),
            checkpoint_every: 0,
            resume: false,
        };
        let out = run_training(code, &opts)?;
        let mean = |xs: &[(u64, f64)]| xs.iter().map(|x| x.1).sum::<f64>() / xs.len().max(1) as f64;
        let window = out.losses.len().min(100);
        let initial_loss = out.losses.first().map_or(f64::NAN, |x| x.1);
        let final_loss = mean(&out.losses[out.losses.len() - window..]);
        let report = run_ber(&DecoderSpec::ArHyper(Box::new(out.trainer.model)), code, eval)?;
        rows.push(AblationRow {
            variant,
            initial_loss,
            final_loss,
            points: report.points,
        });
    }
    Ok(rows)
}

/// One row per variant, one `neg_ln_ber` column per SNR.
pub fn ablation_csv(rows: &[AblationRow]) -> String {
    let mut out = String::from("variant,initial_loss,final_loss");
    if let Some(first) = rows.first() {
        for p in &first.points {
            let _ = write!(out, ",neg_ln_ber@{}dB", p.snr_db);
        }
    }
    out.push('\n');
    for r in rows {
        let _ = write!(out, "{},{},{}", r.variant, r.initial_loss, r.final_loss);
        for p in &r.points {
            let _ = write!(out, ",{}", p.neg_ln_ber.map(|x| x.to_string()).unwrap_or_default());
        }
        out.push('\n');
    }
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CostEstimate {
    /// Plain BP: variable, check and marginalization units per iteration.
    pub base_ops: f64,
    pub hyper_ops_delta: f64,
    pub ar_ops_delta: f64,
    pub overhead_ratio: f64,
}

pub const COST_N_UF: usize = 128;
pub const COST_N_UG: usize = 16;

/// Closed-form operation counts; a graph without edges costs nothing.
pub fn cost_model(n: usize, edges: usize, d: usize, iterations: usize, n_uf: usize, n_ug: usize) -> CostEstimate {
    if edges == 0 {
        return CostEstimate {
            base_ops: 0.0,
            hyper_ops_delta: 0.0,
            ar_ops_delta: 0.0,
            overhead_ratio: 0.0,
        };
    }
    let l = iterations as f64;
    let base_ops = l * (2 * edges + n) as f64;
    let hyper_ops_delta = l * (edges * n_ug * n_uf) as f64;
    let ar_ops_delta = l * (n * (edges + d + n_uf)) as f64;
    let denom = base_ops + hyper_ops_delta;
    CostEstimate {
        base_ops,
        hyper_ops_delta,
        ar_ops_delta,
        overhead_ratio: if denom > 0.0 { ar_ops_delta / denom } else { 0.0 },
    }
}

pub fn cost_for_code(code: &ParityCheckCode, iterations: usize) -> Result<CostEstimate> {
    let graph = EdgeGraph::build(code.parity_check())?;
    let m = code.m();
    Ok(cost_model(code.n(), graph.num_edges(), m * m.saturating_sub(1) / 2, iterations, COST_N_UF, COST_N_UG))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SymmetryReport {
    pub max_message_asymmetry: f64,
    pub violated: bool,
}

/// Above this the decoder is reported as not antisymmetric.
pub const SYMMETRY_TOLERANCE: f64 = 1e-10;

fn max_antisymmetry(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x + y).abs()).fold(0.0, f64::max)
}

/// Compares every message of `decode(llr)` with `−decode(−llr)` on random
/// received frames.
pub fn check_symmetry(decoder: &DecoderSpec, code: &ParityCheckCode, trials: usize, seed: u64) -> Result<SymmetryReport> {
    if trials == 0 {
        return Err(Error::Config("symmetry check needs at least one trial".into()));
    }
    decoder.check_code(code)?;
    let graph = EdgeGraph::build(code.parity_check())?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..trials {
        let snr = rng.gen_range(1.0..8.0);
        let (llr, _) = draw_frames(code, snr, 1, &mut rng);
        let pos: Vec<f64> = llr.iter().copied().collect();
        let neg: Vec<f64> = pos.iter().map(|x| -x).collect();
        match decoder {
            DecoderSpec::Bp(cfg) => {
                let a = decode_bp(&pos, &graph, *cfg);
                let b = decode_bp(&neg, &graph, *cfg);
                for (x, y) in a.var_messages.iter().zip(&b.var_messages) {
                    worst = worst.max(max_antisymmetry(x, y));
                }
                for (x, y) in a.check_messages.iter().zip(&b.check_messages) {
                    worst = worst.max(max_antisymmetry(x, y));
                }
            }
            DecoderSpec::ArHyper(m) => {
                let a = m.decode(&pos)?;
                let b = m.decode(&neg)?;
                for (x, y) in a.var_messages.iter().zip(&b.var_messages) {
                    worst = worst.max(max_antisymmetry(x.as_slice().unwrap(), y.as_slice().unwrap()));
                }
                for (x, y) in a.check_messages.iter().zip(&b.check_messages) {
                    worst = worst.max(max_antisymmetry(x.as_slice().unwrap(), y.as_slice().unwrap()));
                }
            }
            DecoderSpec::MapOracle(_) => {
                return Err(Error::Config("the MAP oracle exchanges no messages".into()));
            }
        }
    }
    Ok(SymmetryReport {
        max_message_asymmetry: worst,
        violated: worst >= SYMMETRY_TOLERANCE,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ar::DecoderParams;
    use crate::catalog;

    fn quick(min_errors: u64) -> BerConfig {
        BerConfig {
            snrs_db: vec![2.0, 4.0],
            min_errors,
            max_frames: 20_000,
            seed: 7,
            workers: 1,
            chunk: 64,
        }
    }

    #[test]
    fn report_counts_are_self_consistent() {
        let code = catalog::resolve("HAMMING_7_4").unwrap();
        let r = run_ber(&DecoderSpec::bp(5), &code, &quick(200)).unwrap();
        for p in &r.points {
            assert!(p.bit_errors >= 200 || p.frames_run == 20_000);
            assert_eq!(p.ber, p.bit_errors as f64 / (p.frames_run as f64 * 7.0));
            assert_eq!(p.neg_ln_ber.unwrap(), -p.ber.ln());
            assert!(p.frame_errors <= p.bit_errors);
        }
        let csv = r.to_csv();
        assert!(csv.starts_with(CSV_HEADER));
        assert_eq!(csv.lines().count(), 3);
        let json: BerReport = serde_json::from_str(&r.to_json().unwrap()).unwrap();
        assert_eq!(json.points.len(), 2);
    }

    #[test]
    fn frame_cap_stops_the_run() {
        let code = catalog::resolve("HAMMING_7_4").unwrap();
        let cfg = BerConfig {
            max_frames: 150,
            min_errors: u64::MAX,
            workers: 2,
            ..quick(0)
        };
        let r = run_ber(&DecoderSpec::bp(5), &code, &cfg).unwrap();
        assert!(r.points.iter().all(|p| p.frames_run == 150));
    }

    #[test]
    fn identical_configs_give_identical_csv() {
        let code = catalog::resolve("HAMMING_7_4").unwrap();
        for workers in [1, 3] {
            let cfg = BerConfig { workers, ..quick(100) };
            let a = run_ber(&DecoderSpec::bp(5), &code, &cfg).unwrap().to_csv();
            let b = run_ber(&DecoderSpec::bp(5), &code, &cfg).unwrap().to_csv();
            assert_eq!(a, b);
        }
    }

    #[test]
    fn map_never_loses_to_bp_on_matched_frames() {
        let code = catalog::resolve("HAMMING_7_4").unwrap();
        let cfg = BerConfig {
            min_errors: u64::MAX,
            max_frames: 5000,
            ..quick(0)
        };
        let bp = run_ber(&DecoderSpec::bp(5), &code, &cfg).unwrap();
        let map = run_ber(&DecoderSpec::map_oracle(&code).unwrap(), &code, &cfg).unwrap();
        for (a, b) in map.points.iter().zip(&bp.points) {
            assert!(a.frame_errors <= b.frame_errors);
        }
    }

    #[test]
    fn cost_examples() {
        let code = catalog::resolve("BCH_63_51").unwrap();
        let c = cost_for_code(&code, 5).unwrap();
        assert!((c.overhead_ratio - 0.05).abs() <= 0.03, "{c:?}");
        let zero = cost_model(0, 0, 0, 5, 128, 16);
        assert_eq!(zero.base_ops + zero.hyper_ops_delta + zero.ar_ops_delta + zero.overhead_ratio, 0.0);
        let c10 = cost_for_code(&code, 10).unwrap();
        assert_eq!(c10.hyper_ops_delta, 2.0 * c.hyper_ops_delta);
        assert_eq!(c10.ar_ops_delta, 2.0 * c.ar_ops_delta);
        assert_eq!(c10.base_ops, 2.0 * c.base_ops);
    }

    #[test]
    fn bp_is_antisymmetric_and_ar_is_not() {
        let code = catalog::resolve("BCH_31_16").unwrap();
        let r = check_symmetry(&DecoderSpec::bp(5), &code, 10, 1).unwrap();
        assert!(!r.violated && r.max_message_asymmetry < 1e-10, "{r:?}");

        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let model = ArDecoder::new(code.clone(), ArConfig::default(), AblationVariant::Full, &mut rng).unwrap();
        let r = check_symmetry(&DecoderSpec::ArHyper(Box::new(model.clone())), &code, 10, 1).unwrap();
        assert!(r.violated);

        let zeros = DecoderParams::zeros(&model.dims(), model.config()).unwrap();
        let flat = ArDecoder::with_params(code.clone(), ArConfig::default(), AblationVariant::Full, zeros).unwrap();
        let r = check_symmetry(&DecoderSpec::ArHyper(Box::new(flat)), &code, 10, 1).unwrap();
        assert!(!r.violated);
        assert_eq!(r.max_message_asymmetry, 0.0);
    }

    #[test]
    fn ar_decoder_for_another_code_is_rejected() {
        let code = catalog::resolve("HAMMING_7_4").unwrap();
        let other = catalog::resolve("BCH_31_16").unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let model = ArDecoder::new(other, ArConfig::default(), AblationVariant::Full, &mut rng).unwrap();
        let err = run_ber(&DecoderSpec::ArHyper(Box::new(model)), &code, &quick(10)).unwrap_err();
        assert!(matches!(err, Error::FingerprintMismatch(_)));
    }

    #[test]
    fn training_resumes_and_ablation_keeps_shapes() {
        let code = catalog::resolve("HAMMING_7_4").unwrap();
        let dir = tempfile::tempdir().unwrap();
        let config = ArConfig {
            iterations: 2,
            f_hidden: vec![8, 8],
            ..ArConfig::default()
        };
        let mut opts = TrainOptions {
            steps: 4,
            seed: 3,
            variant: AblationVariant::Full,
            config: config.clone(),
            checkpoint: dir.path().join("a.json"),
            checkpoint_every: 2,
            resume: false,
        };
        let full = run_training(&code, &opts).unwrap();
        opts.steps = 2;
        opts.checkpoint = dir.path().join("b.json");
        run_training(&code, &opts).unwrap();
        opts.steps = 4;
        opts.resume = true;
        let resumed = run_training(&code, &opts).unwrap();
        assert_eq!(resumed.losses.len(), 2);
        assert_eq!(resumed.losses[1].1.to_bits(), full.losses[3].1.to_bits());
        assert_eq!(resumed.trainer.model.params, full.trainer.model.params);

        let eval = BerConfig {
            max_frames: 200,
            min_errors: 10,
            ..quick(0)
        };
        let rows = run_ablation(&code, &AblationVariant::ALL, 2, &config, 3, &eval, dir.path()).unwrap();
        assert_eq!(rows.len(), 6);
        assert!(rows.iter().all(|r| r.initial_loss.is_finite() && r.points.len() == 2));
        let csv = ablation_csv(&rows);
        assert_eq!(csv.lines().count(), 7);
    }
}
