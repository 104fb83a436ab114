//! Autoregressive inputs of the hypernetwork, computed from the previous
//! iteration's hard decision.

use crate::code::ParityCheckCode;
use crate::graph::EdgeGraph;

/// `a = c_j · lift(s)`.
pub fn compute_a(s: &[f64], c_j: f64, graph: &EdgeGraph) -> Vec<f64> {
    graph.edges().iter().map(|&(_, v)| c_j * s[v]).collect()
}

/// Maps `±1` decisions to bits (`+1 → 1`).
pub fn to_bits(s: &[f64]) -> Vec<u8> {
    s.iter().map(|&x| u8::from(x > 0.0)).collect()
}

/// Syndrome of the decision against the extended parity matrix.
pub fn compute_e(s: &[f64], code: &ParityCheckCode) -> Vec<u8> {
    let ext = code
        .extended_parity()
        .expect("extended parity requires at least two checks");
    ext.mul_vec(&to_bits(s))
}

/// Mismatch between the decision's parity section and the parity obtained by
/// re-encoding its information section.
pub fn compute_z(s: &[f64], code: &ParityCheckCode) -> Vec<u8> {
    let bits = to_bits(s);
    let k = code.k();
    let reencoded = code.encode(&bits[..k]);
    bits[k..]
        .iter()
        .zip(&reencoded[k..])
        .map(|(a, b)| a ^ b)
        .collect()
}

/// Column `index` (1-based) of the SNR table stored column-major.
pub fn embed_snr(index: usize, lut: &[f64], embed_dim: usize) -> &[f64] {
    assert!(index >= 1 && index * embed_dim <= lut.len(), "SNR index {index} out of range");
    &lut[(index - 1) * embed_dim..index * embed_dim]
}

/// Sparse row supports of the extended parity matrix, for fast syndromes.
#[derive(Clone, Debug)]
pub(crate) struct SparseRows(Vec<Vec<usize>>);

impl SparseRows {
    pub(crate) fn new(m: &crate::gf2::BinaryMatrix) -> Self {
        Self(
            (0..m.rows())
                .map(|r| (0..m.cols()).filter(|&c| m.get(r, c) == 1).collect())
                .collect(),
        )
    }

    pub(crate) fn syndrome_into(&self, bits: &[u8], out: &mut [f64]) {
        for (o, row) in out.iter_mut().zip(&self.0) {
            *o = f64::from(row.iter().fold(0u8, |acc, &c| acc ^ bits[c]));
        }
    }
}
