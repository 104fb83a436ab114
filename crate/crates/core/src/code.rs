//! Static description of a binary linear block code.
//!
//! A [`ParityCheckCode`] always lives in "standard-form coordinates": the
//! generator is `[I_k | P]` and the parity-check matrix has had the same column
//! permutation applied, so the first `k` bits of every codeword are the
//! information bits.

use crate::error::{Error, Result};
use crate::gf2::BinaryMatrix;

#[derive(Clone, Debug)]
pub struct ParityCheckCode {
    name: String,
    n: usize,
    k: usize,
    h: BinaryMatrix,
    g_std: BinaryMatrix,
    h_ext: Option<BinaryMatrix>,
    column_perm: Vec<usize>,
}

impl ParityCheckCode {
    /// Rearranges `g` into `[I_k | P]`, mirrors the column permutation on `h`,
    /// and builds the extended parity matrix.
    ///
    /// Unit-vector columns of `g` are selected first; only when some `e_i` is
    /// missing is `g` row-reduced (row operations do not change the code).
    pub fn standardize(g: &BinaryMatrix, h: &BinaryMatrix) -> Result<Self> {
        let (k, n) = (g.rows(), g.cols());
        if h.cols() != n {
            return Err(Error::Shape(format!(
                "generator has {n} columns but parity-check matrix has {}",
                h.cols()
            )));
        }
        if h.rows() + k != n {
            return Err(Error::Shape(format!(
                "parity-check matrix must be {}x{n} for a {k}x{n} generator, got {}x{n}",
                n - k.min(n),
                h.rows()
            )));
        }
        if !g.mul_transpose(h)?.is_zero() {
            return Err(Error::NotOrthogonal);
        }

        let (g_work, unit_cols) = match unit_columns(g) {
            Some(cols) => (g.clone(), cols),
            None => {
                let (rref, pivots) = g.row_reduce();
                if pivots.len() < k {
                    return Err(Error::GeneratorRank {
                        rank: pivots.len(),
                        expected: k,
                    });
                }
                let cols = unit_columns(&rref).expect("reduced generator has unit pivot columns");
                (rref, cols)
            }
        };

        let mut column_perm = unit_cols.clone();
        column_perm.extend((0..n).filter(|c| !unit_cols.contains(c)));
        let g_std = g_work.permute_columns(&column_perm);
        let h_perm = h.permute_columns(&column_perm);
        debug_assert!(g_std.mul_transpose(&h_perm)?.is_zero());

        Self::from_standard_parts(format!("code_{n}_{k}"), g_std, h_perm, column_perm)
    }

    /// Builds a code from a parity-check matrix alone by deriving a generator
    /// from its null space. `h` must have full row rank.
    pub fn from_parity_check(h: &BinaryMatrix) -> Result<Self> {
        let n = h.cols();
        let rank = h.rank();
        if rank != h.rows() {
            return Err(Error::Shape(format!(
                "parity-check matrix has {} rows but rank {rank}",
                h.rows()
            )));
        }
        let g = h
            .null_space()
            .ok_or_else(|| Error::Shape(format!("code of length {n} has dimension 0")))?;
        Self::standardize(&g, h)
    }

    fn from_standard_parts(
        name: String,
        g_std: BinaryMatrix,
        h: BinaryMatrix,
        column_perm: Vec<usize>,
    ) -> Result<Self> {
        let h_ext = if h.rows() >= 2 { Some(extend_parity(&h)?) } else { None };
        Ok(Self {
            name,
            n: g_std.cols(),
            k: g_std.rows(),
            h,
            g_std,
            h_ext,
            column_perm,
        })
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// Number of parity bits, `n - k`.
    pub fn m(&self) -> usize {
        self.n - self.k
    }

    pub fn rate(&self) -> f64 {
        self.k as f64 / self.n as f64
    }

    /// Parity-check matrix in standard-form coordinates.
    pub fn parity_check(&self) -> &BinaryMatrix {
        &self.h
    }

    pub fn generator(&self) -> &BinaryMatrix {
        &self.g_std
    }

    /// The `C(n-k, 2)` pairwise row combinations of the parity-check matrix;
    /// `None` for codes with a single parity check.
    pub fn extended_parity(&self) -> Option<&BinaryMatrix> {
        self.h_ext.as_ref()
    }

    /// `column_perm[i]` is the original column now at position `i`.
    pub fn column_perm(&self) -> &[usize] {
        &self.column_perm
    }

    /// Systematic encoding `info · G_std mod 2`.
    pub fn encode(&self, info: &[u8]) -> Vec<u8> {
        assert_eq!(info.len(), self.k, "information word must have k bits");
        self.g_std.vec_mul(info)
    }

    pub fn syndrome(&self, word: &[u8]) -> Vec<u8> {
        self.h.mul_vec(word)
    }

    pub fn is_codeword(&self, word: &[u8]) -> bool {
        self.syndrome(word).iter().all(|&b| b == 0)
    }
}

/// For each `i < k`, the first column of `g` equal to the unit vector `e_i`.
fn unit_columns(g: &BinaryMatrix) -> Option<Vec<usize>> {
    let k = g.rows();
    let mut found = vec![None; k];
    for c in 0..g.cols() {
        let col = g.column(c);
        if col.iter().filter(|&&b| b == 1).count() == 1 {
            let i = col.iter().position(|&b| b == 1).unwrap();
            found[i].get_or_insert(c);
        }
    }
    found.into_iter().collect()
}

/// All pairwise row XORs of `h`, ordered lexicographically by `(α, β)`,
/// `α < β`.
pub fn extend_parity(h: &BinaryMatrix) -> Result<BinaryMatrix> {
    let m = h.rows();
    if m < 2 {
        return Err(Error::ExtensionUndefined(m));
    }
    let d = m * (m - 1) / 2;
    let mut ext = BinaryMatrix::zeros(d, h.cols())?;
    let mut row = 0;
    for a in 0..m {
        for b in (a + 1)..m {
            for c in 0..h.cols() {
                ext.set(row, c, h.get(a, c) ^ h.get(b, c));
            }
            row += 1;
        }
    }
    Ok(ext)
}
