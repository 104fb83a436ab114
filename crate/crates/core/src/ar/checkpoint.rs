//! JSON checkpoints. Floats are written in shortest round-trip form, so a
//! reloaded trainer continues bit-exactly.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{AblationVariant, ArConfig, ArDecoder, DecoderParams, OptimState, SnrSchedule, Trainer};
use crate::code::ParityCheckCode;
use crate::error::{Error, Result};

pub const CHECKPOINT_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub version: u32,
    pub code: String,
    pub n: usize,
    pub k: usize,
    /// Edge-ordering fingerprint of the parity-check graph.
    pub fingerprint: String,
    pub config: ArConfig,
    pub variant: AblationVariant,
    pub schedule: SnrSchedule,
    pub seed: u64,
    pub step: u64,
    pub params: DecoderParams,
    pub optim: Option<OptimState>,
}

impl Checkpoint {
    pub fn from_trainer(tr: &Trainer) -> Self {
        let mut ck = Self::from_model(&tr.model);
        ck.schedule = tr.schedule.clone();
        ck.seed = tr.seed;
        ck.step = tr.step;
        ck.optim = Some(tr.optim.clone());
        ck
    }

    pub fn from_model(model: &ArDecoder) -> Self {
        let code = model.code();
        Self {
            version: CHECKPOINT_VERSION,
            code: code.name().to_string(),
            n: code.n(),
            k: code.k(),
            fingerprint: model.graph().fingerprint(),
            config: model.config().clone(),
            variant: model.variant(),
            schedule: SnrSchedule::default(),
            seed: 0,
            step: 0,
            params: model.params.clone(),
            optim: None,
        }
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            fs::create_dir_all(dir)?;
        }
        let tmp = path.with_extension("tmp");
        fs::write(&tmp, serde_json::to_vec(self)?)?;
        fs::rename(&tmp, path)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let ck: Self = serde_json::from_slice(&fs::read(path)?)?;
        if ck.version != CHECKPOINT_VERSION {
            return Err(Error::Checkpoint(format!(
                "unsupported checkpoint version {} (expected {CHECKPOINT_VERSION})",
                ck.version
            )));
        }
        Ok(ck)
    }

    /// Rebuilds the decoder, refusing codes whose graph differs.
    pub fn into_model(self, code: ParityCheckCode) -> Result<ArDecoder> {
        self.check_code(&code)?;
        ArDecoder::with_params(code, self.config, self.variant, self.params)
    }

    pub fn into_trainer(self, code: ParityCheckCode) -> Result<Trainer> {
        self.check_code(&code)?;
        let optim = self
            .optim
            .clone()
            .ok_or_else(|| Error::Checkpoint("checkpoint carries no optimiser state".into()))?;
        let (schedule, seed, step) = (self.schedule.clone(), self.seed, self.step);
        let model = ArDecoder::with_params(code, self.config, self.variant, self.params)?;
        let p = &model.params;
        let lens = [
            (optim.theta_f.m.len(), p.theta_f.values.len()),
            (optim.lut_snr.m.len(), p.lut_snr.len()),
            (optim.c.m.len(), p.c.len()),
            (optim.w_bar.m.len(), p.w_bar.len()),
        ];
        if lens.iter().any(|(a, b)| a != b) {
            return Err(Error::Checkpoint("optimiser state does not match parameters".into()));
        }
        Ok(Trainer {
            model,
            optim,
            schedule,
            seed,
            step,
        })
    }

    fn check_code(&self, code: &ParityCheckCode) -> Result<()> {
        let graph = crate::graph::EdgeGraph::build(code.parity_check())?;
        if code.n() != self.n || code.k() != self.k || graph.fingerprint() != self.fingerprint {
            return Err(Error::FingerprintMismatch(format!(
                "checkpoint was trained for {} ({}, {})",
                self.code, self.n, self.k
            )));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;

    fn small_trainer(seed: u64) -> Trainer {
        let code = catalog::resolve("HAMMING_7_4").unwrap();
        let config = ArConfig {
            iterations: 2,
            f_hidden: vec![16, 16],
            ..ArConfig::default()
        };
        let mut tr = Trainer::new(code, config, AblationVariant::Full, seed).unwrap();
        tr.schedule = SnrSchedule {
            snrs_db: vec![2.0, 5.0],
            per_snr: 4,
        };
        tr
    }

    #[test]
    fn resume_is_bit_exact() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("ck.json");
        let mut straight = small_trainer(4);
        for _ in 0..3 {
            straight.step().unwrap();
        }
        Checkpoint::from_trainer(&straight).save(&path).unwrap();
        let expected = straight.step().unwrap();

        let code = catalog::resolve("HAMMING_7_4").unwrap();
        let mut resumed = Checkpoint::load(&path).unwrap().into_trainer(code).unwrap();
        assert_eq!(resumed.step, 3);
        let got = resumed.step().unwrap();
        assert_eq!(got.to_bits(), expected.to_bits());
        assert_eq!(resumed.model.params, straight.model.params);
        assert_eq!(resumed.optim, straight.optim);
    }

    #[test]
    fn mismatched_code_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("ck.json");
        Checkpoint::from_trainer(&small_trainer(1)).save(&path).unwrap();
        let other = catalog::resolve("BCH_31_16").unwrap();
        let err = Checkpoint::load(&path).unwrap().into_model(other).unwrap_err();
        assert!(matches!(err, Error::FingerprintMismatch(_)), "{err}");
    }

    #[test]
    fn unknown_version_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("ck.json");
        let mut ck = Checkpoint::from_trainer(&small_trainer(1));
        ck.version = 99;
        fs::write(&path, serde_json::to_vec(&ck).unwrap()).unwrap();
        assert!(matches!(Checkpoint::load(&path), Err(Error::Checkpoint(_))));
    }
}
