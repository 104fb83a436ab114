//! Unrolled forward pass with an optional tape, and its reverse pass.

use ndarray::{s, Array2, ArrayView2, Axis};
use rand::Rng;

use super::features::SparseRows;
use super::{AblationVariant, ArConfig, ArDims, DecoderParams, FeatureMask};
use crate::bp::{extrinsic_products, hard_decision, sigmoid, CheckRule};
use crate::channel::estimate_snr;
use crate::code::ParityCheckCode;
use crate::error::{Error, Result};
use crate::graph::EdgeGraph;
use crate::nn::MlpTape;

/// Below this (or above `1 −` this) the loss clips `o`.
pub(crate) const LOSS_CLIP: f64 = 1e-12;

#[derive(Clone, Debug)]
pub struct ArDecoder {
    code: ParityCheckCode,
    graph: EdgeGraph,
    ext: SparseRows,
    /// For each edge `(c, v)`: the other edges at `v`, in edge-id order.
    others: Vec<Vec<usize>>,
    dims: ArDims,
    config: ArConfig,
    variant: AblationVariant,
    pub params: DecoderParams,
}

/// Features of one frame at one iteration, as fed to `f`.
#[derive(Clone, Debug, PartialEq)]
pub struct ArFeatures {
    pub a: Vec<f64>,
    pub e: Vec<u8>,
    pub z: Vec<u8>,
    pub p: Vec<f64>,
    pub x_abs: Vec<f64>,
}

/// Everything a forward pass over a batch produced. Arrays are indexed
/// `[iteration][frame, ·]`.
#[derive(Clone, Debug)]
pub struct ArPass {
    pub bits: Vec<Vec<u8>>,
    pub o_history: Vec<Array2<f64>>,
    pub var_messages: Vec<Array2<f64>>,
    pub check_messages: Vec<Array2<f64>>,
    /// Inputs of `f` (the feature history).
    pub f_inputs: Vec<Array2<f64>>,
    /// Outputs of `f`: one `θ_g` per frame and iteration.
    pub theta_g: Vec<Array2<f64>>,
    pub snr_index: Vec<usize>,
    tape: Option<Tape>,
}

#[derive(Clone, Debug)]
struct Tape {
    decisions: Vec<Array2<f64>>,
    f_tapes: Vec<MlpTape>,
    g_tapes: Vec<Vec<MlpTape>>,
    check_grad: Vec<Array2<f64>>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ArGrads {
    pub theta_f: Vec<f64>,
    pub lut_snr: Vec<f64>,
    pub c: Vec<f64>,
    pub w_bar: Vec<f64>,
}

impl ArDecoder {
    /// Fresh decoder with randomly initialised parameters.
    pub fn new<R: Rng + ?Sized>(
        code: ParityCheckCode,
        config: ArConfig,
        variant: AblationVariant,
        rng: &mut R,
    ) -> Result<Self> {
        let (graph, ext, dims) = Self::structure(&code, &config)?;
        let params = DecoderParams::init(&dims, &config, rng)?;
        Ok(Self::assemble(code, graph, ext, dims, config, variant, params))
    }

    pub fn with_params(
        code: ParityCheckCode,
        config: ArConfig,
        variant: AblationVariant,
        params: DecoderParams,
    ) -> Result<Self> {
        let (graph, ext, dims) = Self::structure(&code, &config)?;
        params.validate(&dims, &config)?;
        Ok(Self::assemble(code, graph, ext, dims, config, variant, params))
    }

    fn structure(code: &ParityCheckCode, config: &ArConfig) -> Result<(EdgeGraph, SparseRows, ArDims)> {
        if config.iterations == 0 || config.max_snr == 0 || config.embed_dim == 0 {
            return Err(Error::Config("iterations, SNR classes and embedding width must be positive".into()));
        }
        if config.taylor_q % 2 == 0 {
            return Err(Error::Config(format!("Taylor order must be odd, got {}", config.taylor_q)));
        }
        let h_ext = code
            .extended_parity()
            .ok_or_else(|| Error::ExtensionUndefined(code.m()))?;
        let graph = EdgeGraph::build(code.parity_check())?;
        let dims = ArDims {
            n: code.n(),
            edges: graph.num_edges(),
            d: h_ext.rows(),
            m: code.m(),
            d_max: graph.d_max(),
            embed_dim: config.embed_dim,
        };
        Ok((graph, SparseRows::new(h_ext), dims))
    }

    fn assemble(
        code: ParityCheckCode,
        graph: EdgeGraph,
        ext: SparseRows,
        dims: ArDims,
        config: ArConfig,
        variant: AblationVariant,
        params: DecoderParams,
    ) -> Self {
        let others = graph
            .edges()
            .iter()
            .enumerate()
            .map(|(e, &(_, v))| graph.var_neighbors(v).iter().copied().filter(|&x| x != e).collect())
            .collect();
        Self {
            code,
            graph,
            ext,
            others,
            dims,
            config,
            variant,
            params,
        }
    }

    pub fn code(&self) -> &ParityCheckCode {
        &self.code
    }

    pub fn graph(&self) -> &EdgeGraph {
        &self.graph
    }

    pub fn dims(&self) -> ArDims {
        self.dims
    }

    pub fn config(&self) -> &ArConfig {
        &self.config
    }

    pub fn variant(&self) -> AblationVariant {
        self.variant
    }

    pub fn mask(&self) -> FeatureMask {
        self.variant.mask()
    }

    /// Rule used in evaluation: exact `2·arctanh`.
    pub fn eval_rule(&self) -> CheckRule {
        CheckRule::Exact
    }

    pub fn train_rule(&self) -> CheckRule {
        CheckRule::Taylor(self.config.taylor_q)
    }

    /// Decodes one frame in evaluation mode.
    pub fn decode(&self, llr: &[f64]) -> Result<ArPass> {
        let view = ArrayView2::from_shape((1, llr.len()), llr).map_err(|e| Error::Shape(e.to_string()))?;
        self.forward(view, self.eval_rule(), false)
    }

    /// Row `j` of `g`'s input: `[ℓ_v, x_prev at N(v) \ e (edge-id order), 0…]`.
    fn g_input(&self, llr: &[f64], x_prev: &[f64]) -> Array2<f64> {
        let mut input = Array2::zeros((self.dims.edges, self.dims.d_max));
        for (e, mut row) in input.axis_iter_mut(Axis(0)).enumerate() {
            row[0] = llr[self.graph.edge_var(e)];
            for (i, &other) in self.others[e].iter().enumerate() {
                row[1 + i] = x_prev[other];
            }
        }
        input
    }

    fn fill_features(&self, row: &mut [f64], s: &[f64], bits: &[u8], c_j: f64, snr_index: usize, x_prev: &[f64]) {
        let dims = &self.dims;
        let mask = self.mask();
        if mask.a {
            for (e, &(_, v)) in self.graph.edges().iter().enumerate() {
                row[e] = c_j * s[v];
            }
        }
        if mask.e {
            self.ext.syndrome_into(bits, &mut row[dims.e_offset()..dims.z_offset()]);
        }
        if mask.z {
            let k = self.code.k();
            let reencoded = self.code.encode(&bits[..k]);
            for (i, slot) in row[dims.z_offset()..dims.p_offset()].iter_mut().enumerate() {
                *slot = f64::from(bits[k + i] ^ reencoded[k + i]);
            }
        }
        if mask.p {
            let col = super::embed_snr(snr_index, &self.params.lut_snr, dims.embed_dim);
            row[dims.p_offset()..dims.x_offset()].copy_from_slice(col);
        }
        for (slot, &x) in row[dims.x_offset()..].iter_mut().zip(x_prev) {
            *slot = x.abs();
        }
    }

    /// Splits an `f` input row back into its named features.
    pub fn split_features(&self, row: &[f64]) -> ArFeatures {
        let d = &self.dims;
        let bits = |xs: &[f64]| xs.iter().map(|&x| u8::from(x != 0.0)).collect();
        ArFeatures {
            a: row[..d.e_offset()].to_vec(),
            e: bits(&row[d.e_offset()..d.z_offset()]),
            z: bits(&row[d.z_offset()..d.p_offset()]),
            p: row[d.p_offset()..d.x_offset()].to_vec(),
            x_abs: row[d.x_offset()..].to_vec(),
        }
    }

    /// Runs `L` iterations over a batch of LLR rows. With `record` the pass
    /// keeps what [`backward`](Self::backward) needs.
    pub fn forward(&self, llrs: ArrayView2<f64>, rule: CheckRule, record: bool) -> Result<ArPass> {
        let (batch, n) = llrs.dim();
        if n != self.dims.n {
            return Err(Error::Shape(format!("expected {} LLRs per frame, got {n}", self.dims.n)));
        }
        let llrs = llrs.as_standard_layout();
        let edges = self.dims.edges;
        let rate = self.code.rate();
        let snr_index: Vec<usize> = llrs
            .axis_iter(Axis(0))
            .map(|row| estimate_snr(row.as_slice().unwrap(), rate, self.config.max_snr).clamped_index)
            .collect();

        let iters = self.config.iterations;
        let mut pass = ArPass {
            bits: Vec::new(),
            o_history: Vec::with_capacity(iters),
            var_messages: Vec::with_capacity(iters),
            check_messages: Vec::with_capacity(iters),
            f_inputs: Vec::with_capacity(iters),
            theta_g: Vec::with_capacity(iters),
            snr_index,
            tape: None,
        };
        let mut tape = Tape {
            decisions: Vec::new(),
            f_tapes: Vec::new(),
            g_tapes: Vec::new(),
            check_grad: Vec::new(),
        };

        let mut o_prev = llrs.mapv(sigmoid);
        let mut x_prev = Array2::<f64>::zeros((batch, edges));
        for j in 0..iters {
            let mut f_in = Array2::zeros((batch, self.dims.f_input_width()));
            let mut decisions = Array2::zeros((batch, n));
            for b in 0..batch {
                let (s, bits) = hard_decision(o_prev.row(b).as_slice().unwrap());
                self.fill_features(
                    f_in.row_mut(b).as_slice_mut().unwrap(),
                    &s,
                    &bits,
                    self.params.c[j],
                    pass.snr_index[b],
                    x_prev.row(b).as_slice().unwrap(),
                );
                decisions.row_mut(b).as_slice_mut().unwrap().copy_from_slice(&s);
            }
            let f_tape = self.params.theta_f.forward(f_in.view())?;
            let theta = f_tape.output();

            let mut x_var = Array2::zeros((batch, edges));
            let mut x_chk = Array2::zeros((batch, edges));
            let mut d_chk = Array2::zeros((batch, edges));
            let mut o = Array2::zeros((batch, n));
            let mut g_tapes = Vec::with_capacity(if record { batch } else { 0 });
            for b in 0..batch {
                let llr = llrs.row(b);
                let llr = llr.as_slice().unwrap();
                let input = self.g_input(llr, x_prev.row(b).as_slice().unwrap());
                let g_tape = self.params.g_arch.forward(theta.row(b).as_slice().unwrap(), input.view())?;
                x_var.row_mut(b).assign(&g_tape.output().column(0));

                let prods = extrinsic_products(x_var.row(b).as_slice().unwrap(), &self.graph);
                for (e, &t) in prods.iter().enumerate() {
                    let (val, d) = rule.apply_with_grad(t);
                    x_chk[[b, e]] = val;
                    d_chk[[b, e]] = d;
                }
                let mut u = llr.to_vec();
                for (e, &(_, v)) in self.graph.edges().iter().enumerate() {
                    u[v] += self.params.w_bar[e] * x_chk[[b, e]];
                }
                for (dst, &uv) in o.row_mut(b).iter_mut().zip(&u) {
                    *dst = sigmoid(uv);
                }
                if record {
                    g_tapes.push(g_tape);
                }
            }
            pass.theta_g.push(theta.clone());
            pass.f_inputs.push(f_in);
            pass.var_messages.push(x_var);
            pass.check_messages.push(x_chk.clone());
            pass.o_history.push(o.clone());
            if record {
                tape.decisions.push(decisions);
                tape.f_tapes.push(f_tape);
                tape.g_tapes.push(g_tapes);
                tape.check_grad.push(d_chk);
            }
            o_prev = o;
            x_prev = x_chk;
        }
        pass.bits = o_prev
            .axis_iter(Axis(0))
            .map(|row| hard_decision(row.as_slice().unwrap()).1)
            .collect();
        if record {
            pass.tape = Some(tape);
        }
        Ok(pass)
    }

    /// Gradients of the batch-mean loss (see [`batch_loss`](super::batch_loss))
    /// with respect to every parameter group.
    pub fn backward(&self, llrs: ArrayView2<f64>, truth: ArrayView2<f64>, pass: &ArPass) -> Result<ArGrads> {
        let tape = pass
            .tape
            .as_ref()
            .ok_or_else(|| Error::Shape("forward pass was run without a tape".into()))?;
        let (batch, n) = truth.dim();
        if llrs.dim() != (batch, n) || pass.bits.len() != batch || n != self.dims.n {
            return Err(Error::Shape("batch does not match the recorded pass".into()));
        }
        let edges = self.dims.edges;
        let iters = self.config.iterations;
        let dims = self.dims;
        let mask = self.mask();
        let mut grads = ArGrads {
            theta_f: vec![0.0; self.params.theta_f.values.len()],
            lut_snr: vec![0.0; self.params.lut_snr.len()],
            c: vec![0.0; iters],
            w_bar: vec![0.0; edges],
        };

        // Loss → marginals → check messages of every iteration.
        let scale = 1.0 / (n * batch) as f64;
        let mut g_chk: Vec<Array2<f64>> = (0..iters).map(|_| Array2::zeros((batch, edges))).collect();
        for j in 0..iters {
            let o = &pass.o_history[j];
            let x_chk = &pass.check_messages[j];
            for b in 0..batch {
                for (e, &(_, v)) in self.graph.edges().iter().enumerate() {
                    let ov = o[[b, v]];
                    if ov <= LOSS_CLIP || ov >= 1.0 - LOSS_CLIP {
                        continue;
                    }
                    let gu = (ov - truth[[b, v]]) * scale;
                    grads.w_bar[e] += gu * x_chk[[b, e]];
                    g_chk[j][[b, e]] += gu * self.params.w_bar[e];
                }
            }
        }

        let p_len = self.params.g_arch.num_params();
        for j in (0..iters).rev() {
            let theta = &pass.theta_g[j];
            let mut g_theta = Array2::zeros((batch, p_len));
            let (done, rest) = g_chk.split_at_mut(j);
            let current = &rest[0];
            let mut prev = done.last_mut();
            for b in 0..batch {
                let upstream: Vec<f64> = (0..edges)
                    .map(|e| current[[b, e]] * tape.check_grad[j][[b, e]])
                    .collect();
                let g_var = check_backward(pass.var_messages[j].row(b).as_slice().unwrap(), &upstream, &self.graph);
                let up = ArrayView2::from_shape((edges, 1), &g_var).unwrap();
                let gg = self
                    .params
                    .g_arch
                    .backward(theta.row(b).as_slice().unwrap(), &tape.g_tapes[j][b], up)?;
                g_theta.row_mut(b).as_slice_mut().unwrap().copy_from_slice(&gg.params);
                if let Some(prev) = prev.as_deref_mut() {
                    for e in 0..edges {
                        for (i, &other) in self.others[e].iter().enumerate() {
                            prev[[b, other]] += gg.input[[e, 1 + i]];
                        }
                    }
                }
            }

            let gf = self.params.theta_f.backward(&tape.f_tapes[j], g_theta.view())?;
            for (acc, g) in grads.theta_f.iter_mut().zip(&gf.params) {
                *acc += g;
            }
            let gin = gf.input;
            if mask.a {
                let s = &tape.decisions[j];
                let mut acc = 0.0;
                for b in 0..batch {
                    for (e, &(_, v)) in self.graph.edges().iter().enumerate() {
                        acc += gin[[b, e]] * s[[b, v]];
                    }
                }
                grads.c[j] += acc;
            }
            if mask.p {
                for b in 0..batch {
                    let col = pass.snr_index[b] - 1;
                    let dst = &mut grads.lut_snr[col * dims.embed_dim..(col + 1) * dims.embed_dim];
                    for (d, &g) in dst.iter_mut().zip(gin.slice(s![b, dims.p_offset()..dims.x_offset()])) {
                        *d += g;
                    }
                }
            }
            if let Some(prev) = prev {
                let x_prev = &pass.check_messages[j - 1];
                for b in 0..batch {
                    for e in 0..edges {
                        prev[[b, e]] += gin[[b, dims.x_offset() + e]] * sign(x_prev[[b, e]]);
                    }
                }
            }
        }
        Ok(grads)
    }
}

/// `sign` with `sign(0) = 0`, the subgradient used for `|x|`.
fn sign(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else if x < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// Reverse of the extrinsic product: given `∂L/∂t_e` for every edge, returns
/// `∂L/∂x_e' = Σ_{e ∈ N(c)\e'} ∂L/∂t_e · Π_{N(c)\{e,e'}} x`.
fn check_backward(x: &[f64], g_t: &[f64], graph: &EdgeGraph) -> Vec<f64> {
    let mut out = vec![0.0; x.len()];
    let mut vals = Vec::new();
    let mut grads = Vec::new();
    let mut prefix = Vec::new();
    for c in 0..graph.num_checks() {
        let nb = graph.check_neighbors(c);
        for (skip, &target) in nb.iter().enumerate() {
            vals.clear();
            grads.clear();
            for (i, &e) in nb.iter().enumerate() {
                if i != skip {
                    vals.push(x[e]);
                    grads.push(g_t[e]);
                }
            }
            prefix.clear();
            let mut p = 1.0;
            for &v in &vals {
                prefix.push(p);
                p *= v;
            }
            let mut suffix = 1.0;
            let mut acc = 0.0;
            for i in (0..vals.len()).rev() {
                acc += grads[i] * prefix[i] * suffix;
                suffix *= vals[i];
            }
            out[target] = acc;
        }
    }
    out
}
