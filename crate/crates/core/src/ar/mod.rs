//! Autoregressive hypernetwork decoder.
//!
//! Each iteration a hypernetwork `f` reads features of the previous hard
//! decision (`a`, `e`, `z`), an SNR embedding `p` and the magnitudes of the
//! previous check messages, and emits the weights `θ_g` of a small network `g`
//! that replaces the variable-node update on every edge. Check nodes and the
//! marginalization are those of sum-product BP (with learnable per-edge
//! marginalization weights).

mod checkpoint;
pub mod features;
mod model;
mod train;

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::bp::DEFAULT_TAYLOR_Q;
use crate::channel::DEFAULT_MAX_SNR;
use crate::error::{Error, Result};
use crate::nn::{Activation, MlpArch, ParamVector};

pub use checkpoint::{Checkpoint, CHECKPOINT_VERSION};
pub use features::{compute_a, compute_e, compute_z, embed_snr};
pub use model::{ArDecoder, ArFeatures, ArGrads, ArPass};
pub use train::{batch_loss, loss, Batch, OptimState, SnrSchedule, Trainer};

/// Width of one SNR embedding column.
pub const EMBED_DIM: usize = 64;

/// Learning rate used for every parameter group.
pub const DEFAULT_LR: f64 = 1e-4;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ArConfig {
    pub iterations: usize,
    pub taylor_q: usize,
    /// Number of SNR classes `I` (embedding columns).
    pub max_snr: usize,
    pub embed_dim: usize,
    pub f_hidden: Vec<usize>,
    pub g_hidden: Vec<usize>,
    pub lr: f64,
}

impl Default for ArConfig {
    fn default() -> Self {
        Self {
            iterations: 5,
            taylor_q: DEFAULT_TAYLOR_Q,
            max_snr: DEFAULT_MAX_SNR,
            embed_dim: EMBED_DIM,
            f_hidden: vec![128; 4],
            g_hidden: vec![16, 16],
            lr: DEFAULT_LR,
        }
    }
}

/// Training variants of the ablation study.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AblationVariant {
    Full,
    NoA,
    NoE,
    NoZ,
    NoP,
    ZeroCodeword,
}

impl AblationVariant {
    pub const ALL: [AblationVariant; 6] = [
        AblationVariant::Full,
        AblationVariant::NoA,
        AblationVariant::NoE,
        AblationVariant::NoZ,
        AblationVariant::NoP,
        AblationVariant::ZeroCodeword,
    ];

    pub fn mask(self) -> FeatureMask {
        let mut m = FeatureMask::default();
        match self {
            AblationVariant::NoA => m.a = false,
            AblationVariant::NoE => m.e = false,
            AblationVariant::NoZ => m.z = false,
            AblationVariant::NoP => m.p = false,
            AblationVariant::Full | AblationVariant::ZeroCodeword => {}
        }
        m
    }

    pub fn as_str(self) -> &'static str {
        match self {
            AblationVariant::Full => "full",
            AblationVariant::NoA => "no-a",
            AblationVariant::NoE => "no-e",
            AblationVariant::NoZ => "no-z",
            AblationVariant::NoP => "no-p",
            AblationVariant::ZeroCodeword => "zero-codeword",
        }
    }
}

impl fmt::Display for AblationVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for AblationVariant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key: String = s.chars().filter(char::is_ascii_alphanumeric).collect::<String>().to_ascii_lowercase();
        Ok(match key.as_str() {
            "full" => AblationVariant::Full,
            "noa" => AblationVariant::NoA,
            "noe" => AblationVariant::NoE,
            "noz" => AblationVariant::NoZ,
            "nop" => AblationVariant::NoP,
            "zerocodeword" | "zero" => AblationVariant::ZeroCodeword,
            _ => return Err(Error::Config(format!("unknown variant '{s}'"))),
        })
    }
}

/// Which feature slots of `f`'s input are populated; masked slots stay zero.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct FeatureMask {
    pub a: bool,
    pub e: bool,
    pub z: bool,
    pub p: bool,
}

impl Default for FeatureMask {
    fn default() -> Self {
        Self {
            a: true,
            e: true,
            z: true,
            p: true,
        }
    }
}

/// Sizes derived from the code and the configuration.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ArDims {
    pub n: usize,
    pub edges: usize,
    /// Rows of the extended parity matrix.
    pub d: usize,
    /// Parity checks `n − k`.
    pub m: usize,
    pub d_max: usize,
    pub embed_dim: usize,
}

impl ArDims {
    pub fn f_input_width(&self) -> usize {
        2 * self.edges + self.d + self.m + self.embed_dim
    }

    pub(crate) fn e_offset(&self) -> usize {
        self.edges
    }

    pub(crate) fn z_offset(&self) -> usize {
        self.edges + self.d
    }

    pub(crate) fn p_offset(&self) -> usize {
        self.edges + self.d + self.m
    }

    pub(crate) fn x_offset(&self) -> usize {
        self.edges + self.d + self.m + self.embed_dim
    }
}

/// Every learnable quantity of the decoder.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecoderParams {
    pub theta_f: ParamVector,
    /// `embed_dim × I`, column-major: column `i` is `lut_snr[(i-1)·D .. i·D]`.
    pub lut_snr: Vec<f64>,
    /// Scale `c_j` per iteration.
    pub c: Vec<f64>,
    /// Marginalization weight per edge, shared across iterations.
    pub w_bar: Vec<f64>,
    pub g_arch: MlpArch,
}

impl DecoderParams {
    pub fn architectures(dims: &ArDims, config: &ArConfig) -> Result<(MlpArch, MlpArch)> {
        let mut gw = vec![dims.d_max];
        gw.extend(&config.g_hidden);
        gw.push(1);
        let g_arch = MlpArch::new(gw, Activation::Tanh)?;
        let mut fw = vec![dims.f_input_width()];
        fw.extend(&config.f_hidden);
        fw.push(g_arch.num_params());
        let f_arch = MlpArch::new(fw, Activation::Linear)?;
        Ok((f_arch, g_arch))
    }

    /// Xavier `θ_f`, `N(0, 0.1)` embedding, `c = 1`, `w̄ = 1`.
    pub fn init<R: Rng + ?Sized>(dims: &ArDims, config: &ArConfig, rng: &mut R) -> Result<Self> {
        let (f_arch, g_arch) = Self::architectures(dims, config)?;
        let theta_f = ParamVector::init(f_arch, rng);
        let normal = Normal::new(0.0, 0.1).expect("valid normal");
        let lut_snr = (0..dims.embed_dim * config.max_snr).map(|_| normal.sample(rng)).collect();
        Ok(Self {
            theta_f,
            lut_snr,
            c: vec![1.0; config.iterations],
            w_bar: vec![1.0; dims.edges],
            g_arch,
        })
    }

    /// All-zero networks and embedding; `c = 0`, `w̄ = 1`.
    pub fn zeros(dims: &ArDims, config: &ArConfig) -> Result<Self> {
        let (f_arch, g_arch) = Self::architectures(dims, config)?;
        Ok(Self {
            theta_f: ParamVector::zeros(f_arch),
            lut_snr: vec![0.0; dims.embed_dim * config.max_snr],
            c: vec![0.0; config.iterations],
            w_bar: vec![1.0; dims.edges],
            g_arch,
        })
    }

    pub fn validate(&self, dims: &ArDims, config: &ArConfig) -> Result<()> {
        let (f_arch, g_arch) = Self::architectures(dims, config)?;
        let check = |ok: bool, what: &str| {
            if ok {
                Ok(())
            } else {
                Err(Error::Shape(format!("decoder parameters: {what} does not match the code")))
            }
        };
        check(self.theta_f.arch == f_arch && self.theta_f.values.len() == f_arch.num_params(), "f architecture")?;
        check(self.g_arch == g_arch, "g architecture")?;
        check(self.lut_snr.len() == dims.embed_dim * config.max_snr, "SNR table")?;
        check(self.c.len() == config.iterations, "iteration scales")?;
        check(self.w_bar.len() == dims.edges, "marginalization weights")?;
        check(self.c.iter().all(|x| x.is_finite()), "finite scales")
    }
}
