//! Bias-free tanh MLPs with hand-written reverse mode, and Adam.
//!
//! Layer `i` is stored as an `(in, out)` row-major block of a flat parameter
//! slice, so a network's weights can live in a [`ParamVector`] or be emitted
//! row by row by another network.

use ndarray::{Array2, ArrayView2, Axis};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Activation {
    Tanh,
    Linear,
}

/// Layer widths (input first, output last). Hidden layers are always tanh.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MlpArch {
    widths: Vec<usize>,
    output: Activation,
}

impl MlpArch {
    pub fn new(widths: Vec<usize>, output: Activation) -> Result<Self> {
        if widths.len() < 2 || widths.contains(&0) {
            return Err(Error::Shape(format!("invalid MLP widths {widths:?}")));
        }
        Ok(Self { widths, output })
    }

    pub fn widths(&self) -> &[usize] {
        &self.widths
    }

    pub fn output_activation(&self) -> Activation {
        self.output
    }

    pub fn input_width(&self) -> usize {
        self.widths[0]
    }

    pub fn output_width(&self) -> usize {
        *self.widths.last().unwrap()
    }

    pub fn num_layers(&self) -> usize {
        self.widths.len() - 1
    }

    pub fn num_params(&self) -> usize {
        self.widths.windows(2).map(|w| w[0] * w[1]).sum()
    }

    /// Offset of each layer's block in the flat parameter slice.
    fn offsets(&self) -> Vec<usize> {
        let mut off = Vec::with_capacity(self.num_layers());
        let mut acc = 0;
        for w in self.widths.windows(2) {
            off.push(acc);
            acc += w[0] * w[1];
        }
        off
    }

    fn layer<'a>(&self, params: &'a [f64], i: usize, offset: usize) -> ArrayView2<'a, f64> {
        let (rows, cols) = (self.widths[i], self.widths[i + 1]);
        ArrayView2::from_shape((rows, cols), &params[offset..offset + rows * cols]).unwrap()
    }

    fn activation(&self, layer: usize) -> Activation {
        if layer + 1 == self.num_layers() {
            self.output
        } else {
            Activation::Tanh
        }
    }

    /// Uniform `±sqrt(6 / (fan_in + fan_out))` per layer.
    pub fn init_params<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.num_params());
        for w in self.widths.windows(2) {
            let bound = (6.0 / (w[0] + w[1]) as f64).sqrt();
            out.extend((0..w[0] * w[1]).map(|_| rng.gen_range(-bound..bound)));
        }
        out
    }

    /// Batched forward pass; each row of `input` is one sample.
    pub fn forward(&self, params: &[f64], input: ArrayView2<f64>) -> Result<MlpTape> {
        if params.len() != self.num_params() {
            return Err(Error::Shape(format!(
                "expected {} parameters, got {}",
                self.num_params(),
                params.len()
            )));
        }
        if input.ncols() != self.input_width() {
            return Err(Error::Shape(format!(
                "expected input width {}, got {}",
                self.input_width(),
                input.ncols()
            )));
        }
        let mut activations = Vec::with_capacity(self.widths.len());
        activations.push(input.to_owned());
        for (i, off) in self.offsets().into_iter().enumerate() {
            let mut h = activations[i].dot(&self.layer(params, i, off));
            if self.activation(i) == Activation::Tanh {
                h.mapv_inplace(f64::tanh);
            }
            activations.push(h);
        }
        Ok(MlpTape {
            activations,
            checksum: checksum(params),
        })
    }

    /// Reverse pass. Parameter gradients are summed over the batch rows.
    pub fn backward(&self, params: &[f64], tape: &MlpTape, upstream: ArrayView2<f64>) -> Result<MlpGrads> {
        if tape.activations.len() != self.widths.len() || tape.checksum != checksum(params) {
            return Err(Error::Shape("stale tape: parameters changed since forward".into()));
        }
        let out = tape.output();
        if upstream.dim() != out.dim() {
            return Err(Error::Shape(format!(
                "upstream gradient {:?} does not match output {:?}",
                upstream.dim(),
                out.dim()
            )));
        }
        let offsets = self.offsets();
        let mut param_grads = vec![0.0; self.num_params()];
        let mut delta = upstream.to_owned();
        if self.output == Activation::Tanh {
            delta.zip_mut_with(out, |d, &h| *d *= 1.0 - h * h);
        }
        for i in (0..self.num_layers()).rev() {
            let h_in = &tape.activations[i];
            let gw = h_in.t().dot(&delta);
            let off = offsets[i];
            for (dst, &g) in param_grads[off..off + gw.len()].iter_mut().zip(gw.iter()) {
                *dst = g;
            }
            let mut prev = delta.dot(&self.layer(params, i, off).t());
            if i > 0 {
                prev.zip_mut_with(h_in, |d, &h| *d *= 1.0 - h * h);
            }
            delta = prev;
        }
        Ok(MlpGrads {
            params: param_grads,
            input: delta,
        })
    }
}

fn checksum(params: &[f64]) -> u64 {
    params
        .iter()
        .fold(0xcbf2_9ce4_8422_2325u64, |acc, x| (acc ^ x.to_bits()).wrapping_mul(0x100_0000_01b3))
}

/// Cached activations of one forward call.
#[derive(Clone, Debug)]
pub struct MlpTape {
    activations: Vec<Array2<f64>>,
    checksum: u64,
}

impl MlpTape {
    pub fn output(&self) -> &Array2<f64> {
        self.activations.last().unwrap()
    }

    pub fn activations(&self) -> &[Array2<f64>] {
        &self.activations
    }
}

#[derive(Clone, Debug)]
pub struct MlpGrads {
    pub params: Vec<f64>,
    pub input: Array2<f64>,
}

/// An architecture together with its flat weights.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ParamVector {
    pub arch: MlpArch,
    pub values: Vec<f64>,
}

impl ParamVector {
    pub fn new(arch: MlpArch, values: Vec<f64>) -> Result<Self> {
        if values.len() != arch.num_params() {
            return Err(Error::Shape(format!(
                "architecture needs {} parameters, got {}",
                arch.num_params(),
                values.len()
            )));
        }
        Ok(Self { arch, values })
    }

    pub fn init<R: Rng + ?Sized>(arch: MlpArch, rng: &mut R) -> Self {
        let values = arch.init_params(rng);
        Self { arch, values }
    }

    pub fn zeros(arch: MlpArch) -> Self {
        let values = vec![0.0; arch.num_params()];
        Self { arch, values }
    }

    pub fn forward(&self, input: ArrayView2<f64>) -> Result<MlpTape> {
        self.arch.forward(&self.values, input)
    }

    /// Single-sample convenience wrapper.
    pub fn forward_vec(&self, input: &[f64]) -> Result<(Vec<f64>, MlpTape)> {
        let view = ArrayView2::from_shape((1, input.len()), input).map_err(|e| Error::Shape(e.to_string()))?;
        let tape = self.forward(view)?;
        Ok((tape.output().index_axis(Axis(0), 0).to_vec(), tape))
    }

    pub fn backward(&self, tape: &MlpTape, upstream: ArrayView2<f64>) -> Result<MlpGrads> {
        self.arch.backward(&self.values, tape, upstream)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AdamState {
    pub m: Vec<f64>,
    pub v: Vec<f64>,
    pub t: u64,
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl AdamState {
    pub fn new(len: usize, lr: f64) -> Self {
        Self {
            m: vec![0.0; len],
            v: vec![0.0; len],
            t: 0,
            lr,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
        }
    }

    pub fn step(&mut self, params: &mut [f64], grads: &[f64]) {
        assert_eq!(params.len(), self.m.len());
        assert_eq!(grads.len(), self.m.len());
        self.t += 1;
        let bc1 = 1.0 - self.beta1.powi(self.t as i32);
        let bc2 = 1.0 - self.beta2.powi(self.t as i32);
        for (((p, &g), m), v) in params.iter_mut().zip(grads).zip(&mut self.m).zip(&mut self.v) {
            *m = self.beta1 * *m + (1.0 - self.beta1) * g;
            *v = self.beta2 * *v + (1.0 - self.beta2) * g * g;
            let m_hat = *m / bc1;
            let v_hat = *v / bc2;
            *p -= self.lr * m_hat / (v_hat.sqrt() + self.eps);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use ndarray::Array2;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn zero_weights_give_zero_output() {
        let arch = MlpArch::new(vec![3, 4, 2], Activation::Linear).unwrap();
        let p = ParamVector::zeros(arch);
        let (out, _) = p.forward_vec(&[1.0, -2.0, 3.0]).unwrap();
        assert_eq!(out, vec![0.0, 0.0]);
    }

    #[test]
    fn scalar_network() {
        let arch = MlpArch::new(vec![1, 1], Activation::Tanh).unwrap();
        let p = ParamVector::new(arch, vec![0.7]).unwrap();
        let (out, _) = p.forward_vec(&[1.5]).unwrap();
        assert_abs_diff_eq!(out[0], (0.7f64 * 1.5).tanh(), epsilon = 1e-15);

        let arch = MlpArch::new(vec![1, 1], Activation::Linear).unwrap();
        let p = ParamVector::new(arch, vec![0.7]).unwrap();
        let (_, tape) = p.forward_vec(&[1.5]).unwrap();
        let g = p.backward(&tape, Array2::ones((1, 1)).view()).unwrap();
        assert_abs_diff_eq!(g.params[0], 1.5, epsilon = 1e-15);
        assert_abs_diff_eq!(g.input[[0, 0]], 0.7, epsilon = 1e-15);
    }

    #[test]
    fn zero_upstream_gives_zero_grads() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let arch = MlpArch::new(vec![4, 8, 3], Activation::Tanh).unwrap();
        let p = ParamVector::init(arch, &mut rng);
        let (_, tape) = p.forward_vec(&[0.1, 0.2, -0.3, 0.4]).unwrap();
        let g = p.backward(&tape, Array2::zeros((1, 3)).view()).unwrap();
        assert!(g.params.iter().all(|&x| x == 0.0));
        assert!(g.input.iter().all(|&x| x == 0.0));
    }

    #[test]
    fn stale_tape_and_shape_errors() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let arch = MlpArch::new(vec![2, 3, 1], Activation::Tanh).unwrap();
        let mut p = ParamVector::init(arch, &mut rng);
        assert!(p.forward_vec(&[1.0]).is_err());
        let (_, tape) = p.forward_vec(&[1.0, 2.0]).unwrap();
        p.values[0] += 0.5;
        assert!(p.backward(&tape, Array2::ones((1, 1)).view()).is_err());
        assert!(MlpArch::new(vec![3], Activation::Tanh).is_err());
        assert!(MlpArch::new(vec![3, 0, 1], Activation::Tanh).is_err());
    }

    #[test]
    fn tanh_output_networks_are_odd() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..20 {
            let arch = MlpArch::new(vec![5, 16, 16, 1], Activation::Tanh).unwrap();
            let p = ParamVector::init(arch, &mut rng);
            let x: Vec<f64> = (0..5).map(|_| rng.gen_range(-5.0..5.0)).collect();
            let neg: Vec<f64> = x.iter().map(|v| -v).collect();
            let (a, _) = p.forward_vec(&x).unwrap();
            let (b, _) = p.forward_vec(&neg).unwrap();
            assert_eq!(a[0], -b[0]);
        }
    }

    fn rel_err(a: f64, b: f64) -> f64 {
        (a - b).abs() / a.abs().max(b.abs()).max(1e-6)
    }

    /// Central differences of `Σ r ⊙ out` against the reverse pass.
    fn finite_difference_check(widths: Vec<usize>, output: Activation, instances: usize, seed: u64) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let h = 1e-5;
        for _ in 0..instances {
            let arch = MlpArch::new(widths.clone(), output).unwrap();
            let mut p = ParamVector::init(arch.clone(), &mut rng);
            let x: Vec<f64> = (0..arch.input_width()).map(|_| rng.gen_range(-2.0..2.0)).collect();
            let r: Vec<f64> = (0..arch.output_width()).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let objective = |p: &ParamVector, x: &[f64]| -> f64 {
                let (out, _) = p.forward_vec(x).unwrap();
                out.iter().zip(&r).map(|(a, b)| a * b).sum()
            };
            let (_, tape) = p.forward_vec(&x).unwrap();
            let up = Array2::from_shape_vec((1, r.len()), r.clone()).unwrap();
            let g = p.backward(&tape, up.view()).unwrap();
            for i in 0..p.values.len() {
                let orig = p.values[i];
                p.values[i] = orig + h;
                let plus = objective(&p, &x);
                p.values[i] = orig - h;
                let minus = objective(&p, &x);
                p.values[i] = orig;
                let fd = (plus - minus) / (2.0 * h);
                assert!(rel_err(g.params[i], fd) < 1e-4, "param {i}: {} vs {fd}", g.params[i]);
            }
            for i in 0..x.len() {
                let mut xp = x.clone();
                xp[i] += h;
                let mut xm = x.clone();
                xm[i] -= h;
                let fd = (objective(&p, &xp) - objective(&p, &xm)) / (2.0 * h);
                assert!(rel_err(g.input[[0, i]], fd) < 1e-4, "input {i}");
            }
        }
    }

    #[test]
    fn gradients_match_finite_differences() {
        finite_difference_check(vec![5, 16, 16, 1], Activation::Tanh, 100, 11);
        finite_difference_check(vec![9, 12, 12, 12, 12, 7], Activation::Linear, 100, 12);
    }

    #[test]
    fn first_adam_step() {
        let mut st = AdamState::new(1, 1e-4);
        let mut p = [0.0];
        st.step(&mut p, &[0.0]);
        assert_eq!(p[0], 0.0);

        let mut st = AdamState::new(1, 1e-4);
        let mut p = [0.0];
        st.step(&mut p, &[1.0]);
        assert_abs_diff_eq!(p[0], -1e-4 / (1.0 + 1e-8), epsilon = 1e-18);
    }

    #[test]
    fn adam_update_converges_to_lr_for_constant_gradient() {
        let mut st = AdamState::new(1, 1e-3);
        let mut p = [0.0];
        let mut last = 0.0;
        for _ in 0..10_000 {
            let before = p[0];
            st.step(&mut p, &[0.37]);
            last = before - p[0];
        }
        assert_abs_diff_eq!(last, 1e-3, epsilon = 1e-9);
        assert!(st.v.iter().all(|&v| v >= 0.0));
    }
}
