//! Sum-product belief propagation over an [`EdgeGraph`], flooding schedule.
//!
//! One iteration is a variable step, a check step and a marginalization of the
//! check-to-variable messages. Messages start at zero, so the first variable
//! step injects the channel LLRs.

use crate::graph::EdgeGraph;

/// Clipping margin keeping messages strictly inside `(-1, 1)` before `arctanh`.
pub const EPS_CLIP: f64 = 1e-7;

/// Taylor order used while training.
pub const DEFAULT_TAYLOR_Q: usize = 1005;

/// How the check node maps an extrinsic product `t` back to the LLR domain.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CheckRule {
    /// `2·arctanh(t)`.
    Exact,
    /// Odd Taylor series of `2·arctanh(t)` truncated at degree `q`.
    Taylor(usize),
}

impl CheckRule {
    #[inline]
    pub fn apply(self, t: f64) -> f64 {
        match self {
            CheckRule::Exact => 2.0 * odd_atanh(clip(t)),
            CheckRule::Taylor(q) => taylor_atanh2(clip(t), q),
        }
    }

    /// Value and derivative with respect to the (unclipped) product. The
    /// derivative is zero where clipping is active.
    #[inline]
    pub fn apply_with_grad(self, t: f64) -> (f64, f64) {
        let tc = clip(t);
        let clipped = tc != t;
        let (val, d) = match self {
            CheckRule::Exact => (2.0 * odd_atanh(tc), 2.0 / (1.0 - tc * tc)),
            CheckRule::Taylor(q) => taylor_atanh2_with_grad(tc, q),
        };
        (val, if clipped { 0.0 } else { d })
    }
}

// The platform libm is not guaranteed to be exactly odd; evaluating on |x|
// keeps the decoder antisymmetric to the last bit.
#[inline]
pub fn odd_atanh(t: f64) -> f64 {
    t.abs().atanh().copysign(t)
}

#[inline]
pub fn odd_tanh(x: f64) -> f64 {
    x.abs().tanh().copysign(x)
}

#[inline]
pub fn clip(t: f64) -> f64 {
    t.clamp(-1.0 + EPS_CLIP, 1.0 - EPS_CLIP)
}

#[inline]
pub fn sigmoid(u: f64) -> f64 {
    1.0 / (1.0 + (-u).exp())
}

/// `2·Σ_{m=0}^{(q-1)/2} t^(2m+1)/(2m+1)`, Horner in `t²`.
pub fn taylor_atanh2(t: f64, q: usize) -> f64 {
    assert!(q % 2 == 1, "Taylor order must be odd");
    let t2 = t * t;
    let top = (q - 1) / 2;
    let mut acc = 1.0 / q as f64;
    for m in (0..top).rev() {
        acc = acc * t2 + 1.0 / (2 * m + 1) as f64;
    }
    2.0 * t * acc
}

fn taylor_atanh2_with_grad(t: f64, q: usize) -> (f64, f64) {
    assert!(q % 2 == 1, "Taylor order must be odd");
    let t2 = t * t;
    let top = (q - 1) / 2;
    let mut acc = 1.0 / q as f64;
    let mut dacc = 1.0;
    for m in (0..top).rev() {
        acc = acc * t2 + 1.0 / (2 * m + 1) as f64;
        dacc = dacc * t2 + 1.0;
    }
    (2.0 * t * acc, 2.0 * dacc)
}

/// `x[e] = tanh(½(llr[v] + Σ_{e'∈N(v)\e} x_prev[e']))`, clipped.
pub fn variable_step(llr: &[f64], x_prev: &[f64], graph: &EdgeGraph) -> Vec<f64> {
    let total = graph.marginalize_sum(x_prev);
    graph
        .edges()
        .iter()
        .zip(x_prev)
        .map(|(&(_, v), &xe)| clip(odd_tanh(0.5 * (llr[v] + total[v] - xe))))
        .collect()
}

/// Product over `N(c) \ e` for every edge, computed with prefix and suffix
/// products so zero messages are handled exactly.
pub fn extrinsic_products(x: &[f64], graph: &EdgeGraph) -> Vec<f64> {
    let mut out = vec![0.0; x.len()];
    let mut prefix = Vec::new();
    for c in 0..graph.num_checks() {
        let nb = graph.check_neighbors(c);
        prefix.clear();
        let mut p = 1.0;
        for &e in nb {
            prefix.push(p);
            p *= x[e];
        }
        let mut suffix = 1.0;
        for (i, &e) in nb.iter().enumerate().rev() {
            out[e] = prefix[i] * suffix;
            suffix *= x[e];
        }
    }
    out
}

pub fn check_step(x_prev: &[f64], graph: &EdgeGraph, rule: CheckRule) -> Vec<f64> {
    extrinsic_products(x_prev, graph)
        .into_iter()
        .map(|t| rule.apply(t))
        .collect()
}

pub fn check_step_exact(x_prev: &[f64], graph: &EdgeGraph) -> Vec<f64> {
    check_step(x_prev, graph, CheckRule::Exact)
}

pub fn check_step_taylor(x_prev: &[f64], graph: &EdgeGraph, q: usize) -> Vec<f64> {
    check_step(x_prev, graph, CheckRule::Taylor(q))
}

/// `u[v] = llr[v] + Σ_{e∈N(v)} w[e]·x[e]`, `o = σ(u)`.
pub fn marginalize(llr: &[f64], x: &[f64], graph: &EdgeGraph, weights: &[f64]) -> (Vec<f64>, Vec<f64>) {
    assert_eq!(weights.len(), graph.num_edges());
    let mut u = llr.to_vec();
    for (e, &(_, v)) in graph.edges().iter().enumerate() {
        u[v] += weights[e] * x[e];
    }
    let o = u.iter().map(|&x| sigmoid(x)).collect();
    (u, o)
}

/// `s = +1` where `o > 0.5`, else `-1`; bit 1 ↔ `+1`.
pub fn hard_decision(o: &[f64]) -> (Vec<f64>, Vec<u8>) {
    o.iter()
        .map(|&p| if p > 0.5 { (1.0, 1u8) } else { (-1.0, 0u8) })
        .unzip()
}

pub fn syndrome_is_zero(bits: &[u8], graph: &EdgeGraph) -> bool {
    (0..graph.num_checks()).all(|c| {
        graph
            .check_neighbors(c)
            .iter()
            .fold(0u8, |acc, &e| acc ^ bits[graph.edge_var(e)])
            == 0
    })
}

#[derive(Clone, Copy, Debug)]
pub struct BpConfig {
    pub iterations: usize,
    pub rule: CheckRule,
    /// Stop once the hard decision satisfies every check.
    pub early_exit: bool,
}

impl Default for BpConfig {
    fn default() -> Self {
        Self {
            iterations: 5,
            rule: CheckRule::Exact,
            early_exit: false,
        }
    }
}

#[derive(Clone, Debug)]
pub struct BpOutput {
    pub bits: Vec<u8>,
    pub o_history: Vec<Vec<f64>>,
    pub u_history: Vec<Vec<f64>>,
    /// Variable-to-check messages of each iteration.
    pub var_messages: Vec<Vec<f64>>,
    /// Check-to-variable messages of each iteration.
    pub check_messages: Vec<Vec<f64>>,
}

pub fn decode_bp(llr: &[f64], graph: &EdgeGraph, config: BpConfig) -> BpOutput {
    assert!(config.iterations >= 1);
    assert_eq!(llr.len(), graph.n());
    let ones = vec![1.0; graph.num_edges()];
    let mut x = vec![0.0; graph.num_edges()];
    let mut out = BpOutput {
        bits: Vec::new(),
        o_history: Vec::with_capacity(config.iterations),
        u_history: Vec::with_capacity(config.iterations),
        var_messages: Vec::with_capacity(config.iterations),
        check_messages: Vec::with_capacity(config.iterations),
    };
    for _ in 0..config.iterations {
        let xv = variable_step(llr, &x, graph);
        x = check_step(&xv, graph, config.rule);
        let (u, o) = marginalize(llr, &x, graph, &ones);
        let (_, bits) = hard_decision(&o);
        out.var_messages.push(xv);
        out.check_messages.push(x.clone());
        out.u_history.push(u);
        out.o_history.push(o);
        out.bits = bits;
        if config.early_exit && syndrome_is_zero(&out.bits, graph) {
            break;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gf2::BinaryMatrix;
    use approx::assert_abs_diff_eq;

    fn graph(rows: &[&[u8]]) -> EdgeGraph {
        EdgeGraph::build(&BinaryMatrix::from_rows(rows).unwrap()).unwrap()
    }

    #[test]
    fn variable_step_examples() {
        let g = graph(&[&[1, 1, 0], &[0, 1, 1]]);
        let llr = [1.0, -2.0, 0.5];
        let x = variable_step(&llr, &[0.0; 4], &g);
        for (e, &(_, v)) in g.edges().iter().enumerate() {
            assert_abs_diff_eq!(x[e], (llr[v] / 2.0).tanh(), epsilon = 1e-15);
        }
        assert_eq!(variable_step(&[0.0; 3], &[0.0; 4], &g), vec![0.0; 4]);

        let g = graph(&[&[1], &[1]]);
        let x = variable_step(&[2.0], &[0.5, -0.5], &g);
        assert_abs_diff_eq!(x[0], 0.75f64.tanh(), epsilon = 1e-15);
        assert_abs_diff_eq!(x[1], 1.25f64.tanh(), epsilon = 1e-15);
    }

    #[test]
    fn check_step_examples() {
        let g = graph(&[&[1, 1, 1]]);
        let x = check_step_exact(&[0.5, 0.0, 0.3], &g);
        assert_eq!(x[0], 0.0);
        assert_eq!(x[2], 0.0);
        assert_abs_diff_eq!(x[1], 2.0 * 0.15f64.atanh(), epsilon = 1e-15);

        let x = check_step_exact(&[0.5, 0.5, 0.5], &g);
        for xe in x {
            assert_abs_diff_eq!(xe, 2.0 * 0.25f64.atanh(), epsilon = 1e-15);
            assert_abs_diff_eq!(xe, 0.5108, epsilon = 1e-4);
        }

        let g = graph(&[&[1, 1]]);
        let (a, b) = (0.3, -0.7);
        let x = check_step_exact(&[a, b], &g);
        assert_abs_diff_eq!(x[0], 2.0 * b.atanh(), epsilon = 1e-15);
        assert_abs_diff_eq!(x[1], 2.0 * a.atanh(), epsilon = 1e-15);
    }

    #[test]
    fn taylor_examples() {
        for t in [-0.7, 0.0, 0.2, 0.9] {
            assert_abs_diff_eq!(taylor_atanh2(t, 1), 2.0 * t, epsilon = 1e-15);
        }
        assert_eq!(taylor_atanh2(0.0, 1005), 0.0);
        let t: f64 = 0.9;
        let q = 1005;
        let bound = 2.0 * t.powi(q as i32 + 2) / ((q + 2) as f64 * (1.0 - t * t));
        let err = (taylor_atanh2(t, q) - 2.0 * t.atanh()).abs();
        assert!(err <= bound + 1e-14, "err {err} bound {bound}");
    }

    #[test]
    fn taylor_gradient_matches_series_derivative() {
        for &t in &[-0.95, -0.3, 0.0, 0.5, 0.9] {
            let (v, d) = taylor_atanh2_with_grad(t, 201);
            assert_abs_diff_eq!(v, taylor_atanh2(t, 201), epsilon = 1e-15);
            let h = 1e-6;
            let fd = (taylor_atanh2(t + h, 201) - taylor_atanh2(t - h, 201)) / (2.0 * h);
            assert_abs_diff_eq!(d, fd, epsilon = 1e-6 * (1.0 + d.abs()));
        }
    }

    #[test]
    fn taylor_error_shrinks_with_order() {
        // beyond the knee the tail error at |t| <= 0.99 at least halves per doubling of q
        for &t in &[0.5f64, 0.9, 0.99] {
            let exact = 2.0 * t.atanh();
            let mut q = 1001;
            let mut prev = (taylor_atanh2(t, q) - exact).abs();
            for _ in 0..3 {
                q = 2 * q + 1;
                let err = (taylor_atanh2(t, q) - exact).abs();
                assert!(err <= prev / 2.0 || err < 1e-13, "t={t} q={q}: {err} vs {prev}");
                prev = err;
            }
        }
    }

    #[test]
    fn marginalize_and_hard_decision() {
        let g = graph(&[&[1, 1, 0], &[0, 1, 1]]);
        let llr = [0.3, -1.0, 2.0];
        let (u, o) = marginalize(&llr, &[0.0; 4], &g, &[1.0; 4]);
        assert_eq!(u, llr.to_vec());
        for (oi, l) in o.iter().zip(llr) {
            assert_abs_diff_eq!(*oi, sigmoid(l), epsilon = 1e-15);
        }

        let x = [0.1, -0.4, 0.25, 1.5];
        let w = [0.5, 2.0, -1.0, 0.75];
        let (u, _) = marginalize(&llr, &x, &g, &w);
        let wx: Vec<f64> = x.iter().zip(&w).map(|(a, b)| a * b).collect();
        let alt: Vec<f64> = g.marginalize_sum(&wx).iter().zip(&llr).map(|(a, b)| a + b).collect();
        for (a, b) in u.iter().zip(&alt) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-12);
        }

        assert_eq!(hard_decision(&[0.9, 0.1]), (vec![1.0, -1.0], vec![1, 0]));
        assert_eq!(hard_decision(&[0.5]), (vec![-1.0], vec![0]));
    }

    #[test]
    fn noiseless_frames_decode_to_the_codeword() {
        let code = crate::catalog::resolve("BCH_31_16").unwrap();
        let g = EdgeGraph::build(code.parity_check()).unwrap();
        let info: Vec<u8> = (0..16).map(|i| (i % 3 == 0) as u8).collect();
        let cw = code.encode(&info);
        let frame = crate::channel::transmit_with_noise(&cw, 3.0, code.rate(), &vec![0.0; 31]);
        let (_, bits0) = hard_decision(&frame.llr.iter().map(|&l| sigmoid(l)).collect::<Vec<_>>());
        assert_eq!(bits0, cw);
        for iterations in [1, 5] {
            let out = decode_bp(&frame.llr, &g, BpConfig { iterations, ..Default::default() });
            assert_eq!(out.bits, cw);
            assert!(syndrome_is_zero(&out.bits, &g));
            assert_eq!(out.o_history.len(), iterations);
        }
        let early = decode_bp(&frame.llr, &g, BpConfig { iterations: 50, early_exit: true, ..Default::default() });
        assert_eq!(early.o_history.len(), 1);
    }

    #[test]
    fn messages_stay_inside_the_clip_range() {
        let code = crate::catalog::resolve("HAMMING_7_4").unwrap();
        let g = EdgeGraph::build(code.parity_check()).unwrap();
        let llr = [80.0, -60.0, 45.0, -30.0, 70.0, 0.0, -90.0];
        let out = decode_bp(&llr, &g, BpConfig { iterations: 10, ..Default::default() });
        for xv in &out.var_messages {
            assert!(xv.iter().all(|x| x.abs() <= 1.0 - EPS_CLIP));
        }
        assert!(out.o_history.iter().flatten().all(|o| o.is_finite()));
    }
}
