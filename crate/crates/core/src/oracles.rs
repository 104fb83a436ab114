//! Brute-force references over the full codebook: bitwise posteriors and
//! block MAP decoding. Only for small `k`.

use crate::code::ParityCheckCode;
use crate::error::{Error, Result};

/// Largest dimension accepted by [`enumerate_codebook`].
pub const MAX_ENUM_K: usize = 20;

/// All `2^k` codewords; word `i` encodes the information bits of `i`
/// (bit `j` of the information word is bit `j` of `i`).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Codebook {
    n: usize,
    words: Vec<Vec<u8>>,
}

impl Codebook {
    fn from_generator_rows(n: usize, rows: &[Vec<u8>]) -> Self {
        let k = rows.len();
        let mut words = Vec::with_capacity(1 << k);
        for i in 0usize..1 << k {
            let mut w = vec![0u8; n];
            for (j, row) in rows.iter().enumerate() {
                if (i >> j) & 1 == 1 {
                    for (a, &b) in w.iter_mut().zip(row) {
                        *a ^= b;
                    }
                }
            }
            words.push(w);
        }
        Self { n, words }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn words(&self) -> &[Vec<u8>] {
        &self.words
    }
}

pub fn enumerate_codebook(code: &ParityCheckCode) -> Result<Codebook> {
    if code.k() > MAX_ENUM_K {
        return Err(Error::CodebookTooLarge(code.k()));
    }
    let g = code.generator();
    let rows: Vec<Vec<u8>> = (0..g.rows()).map(|r| g.row(r).to_vec()).collect();
    Ok(Codebook::from_generator_rows(code.n(), &rows))
}

fn scores(llr: &[f64], codebook: &Codebook) -> Vec<f64> {
    assert_eq!(llr.len(), codebook.n, "LLR length does not match the codebook");
    codebook
        .words
        .iter()
        .map(|w| w.iter().zip(llr).filter(|(&b, _)| b == 1).map(|(_, &l)| l).sum())
        .collect()
}

/// `P(c_v = 1 | llr)` with `P(c | llr) ∝ exp(Σ_v c_v·llr_v)`, normalised
/// against the largest score so that no term overflows.
pub fn exact_marginals(llr: &[f64], codebook: &Codebook) -> Vec<f64> {
    let s = scores(llr, codebook);
    let max = s.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let weights: Vec<f64> = s.iter().map(|&x| (x - max).exp()).collect();
    let z: f64 = weights.iter().sum();
    let mut out = vec![0.0; codebook.n];
    for (w, word) in weights.iter().zip(&codebook.words) {
        for (o, &b) in out.iter_mut().zip(word) {
            if b == 1 {
                *o += w;
            }
        }
    }
    out.iter().map(|&x| (x / z).clamp(0.0, 1.0)).collect()
}

/// Most likely codeword; ties go to the lowest codeword index.
pub fn exact_map(llr: &[f64], codebook: &Codebook) -> Vec<u8> {
    let s = scores(llr, codebook);
    let mut best = 0;
    for (i, &x) in s.iter().enumerate() {
        if x > s[best] {
            best = i;
        }
    }
    codebook.words[best].clone()
}
