//! Dense binary matrices and the GF(2) linear algebra needed to move between
//! parity-check and generator descriptions of a code.

use std::fmt;

use crate::error::{Error, Result};

/// A dense matrix over GF(2), stored row-major with one byte per entry.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct BinaryMatrix {
    rows: usize,
    cols: usize,
    data: Vec<u8>,
}

impl BinaryMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::Shape(format!(
                "binary matrix must be at least 1x1, got {rows}x{cols}"
            )));
        }
        Ok(Self {
            rows,
            cols,
            data: vec![0; rows * cols],
        })
    }

    pub fn identity(size: usize) -> Result<Self> {
        let mut m = Self::zeros(size, size)?;
        for i in 0..size {
            m.set(i, i, 1);
        }
        Ok(m)
    }

    /// Builds a matrix from row vectors. Every entry must be 0 or 1 and every
    /// row must have the same length.
    pub fn from_rows<R: AsRef<[u8]>>(rows: &[R]) -> Result<Self> {
        let cols = rows.first().map_or(0, |r| r.as_ref().len());
        let mut m = Self::zeros(rows.len(), cols)?;
        for (r, row) in rows.iter().enumerate() {
            let row = row.as_ref();
            if row.len() != cols {
                return Err(Error::Shape(format!(
                    "row {r} has {} entries, expected {cols}",
                    row.len()
                )));
            }
            for (c, &bit) in row.iter().enumerate() {
                if bit > 1 {
                    return Err(Error::Shape(format!("entry ({r},{c}) = {bit} is not a bit")));
                }
                m.set(r, c, bit);
            }
        }
        Ok(m)
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> u8 {
        self.data[r * self.cols + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, bit: u8) {
        debug_assert!(bit <= 1);
        self.data[r * self.cols + c] = bit;
    }

    #[inline]
    pub fn row(&self, r: usize) -> &[u8] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    fn row_mut(&mut self, r: usize) -> &mut [u8] {
        &mut self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn column(&self, c: usize) -> Vec<u8> {
        (0..self.rows).map(|r| self.get(r, c)).collect()
    }

    pub fn count_ones(&self) -> usize {
        self.data.iter().filter(|&&b| b == 1).count()
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self {
            rows: self.cols,
            cols: self.rows,
            data: vec![0; self.data.len()],
        };
        for r in 0..self.rows {
            for c in 0..self.cols {
                t.set(c, r, self.get(r, c));
            }
        }
        t
    }

    /// `(self · v) mod 2` for a column vector `v` of length `cols`.
    pub fn mul_vec(&self, v: &[u8]) -> Vec<u8> {
        assert_eq!(v.len(), self.cols, "vector length does not match matrix width");
        (0..self.rows)
            .map(|r| {
                self.row(r)
                    .iter()
                    .zip(v)
                    .fold(0u8, |acc, (&a, &b)| acc ^ (a & b))
            })
            .collect()
    }

    /// `(v · self) mod 2` for a row vector `v` of length `rows`.
    pub fn vec_mul(&self, v: &[u8]) -> Vec<u8> {
        assert_eq!(v.len(), self.rows, "vector length does not match matrix height");
        let mut out = vec![0u8; self.cols];
        for (r, &bit) in v.iter().enumerate() {
            if bit == 1 {
                for (o, &a) in out.iter_mut().zip(self.row(r)) {
                    *o ^= a;
                }
            }
        }
        out
    }

    /// `(self · otherᵀ) mod 2`.
    pub fn mul_transpose(&self, other: &Self) -> Result<Self> {
        if self.cols != other.cols {
            return Err(Error::Shape(format!(
                "cannot multiply {}x{} by transpose of {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = Self::zeros(self.rows, other.rows)?;
        for i in 0..self.rows {
            for j in 0..other.rows {
                let bit = self
                    .row(i)
                    .iter()
                    .zip(other.row(j))
                    .fold(0u8, |acc, (&a, &b)| acc ^ (a & b));
                out.set(i, j, bit);
            }
        }
        Ok(out)
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|&b| b == 0)
    }

    /// Returns the matrix whose column `i` is column `perm[i]` of `self`.
    pub fn permute_columns(&self, perm: &[usize]) -> Self {
        assert_eq!(perm.len(), self.cols);
        let mut out = self.clone();
        for r in 0..self.rows {
            for (i, &p) in perm.iter().enumerate() {
                out.data[r * self.cols + i] = self.get(r, p);
            }
        }
        out
    }

    /// Reduced row echelon form. Returns the reduced matrix (rank rows, zero
    /// rows dropped) together with the pivot column of each remaining row.
    pub fn row_reduce(&self) -> (Self, Vec<usize>) {
        let mut a = self.clone();
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..a.cols {
            if r == a.rows {
                break;
            }
            let Some(p) = (r..a.rows).find(|&i| a.get(i, c) == 1) else {
                continue;
            };
            if p != r {
                for j in 0..a.cols {
                    a.data.swap(p * a.cols + j, r * a.cols + j);
                }
            }
            let pivot_row = a.row(r).to_vec();
            for i in 0..a.rows {
                if i != r && a.get(i, c) == 1 {
                    for (x, &y) in a.row_mut(i).iter_mut().zip(&pivot_row) {
                        *x ^= y;
                    }
                }
            }
            pivots.push(c);
            r += 1;
        }
        a.data.truncate(r.max(1) * a.cols);
        a.rows = r.max(1);
        if r == 0 {
            a.data.iter_mut().for_each(|b| *b = 0);
        }
        (a, pivots)
    }

    pub fn rank(&self) -> usize {
        self.row_reduce().1.len()
    }

    /// A basis of the right null space `{x : self·x = 0}`, one basis vector per
    /// row. Returns `None` when the null space is trivial.
    pub fn null_space(&self) -> Option<Self> {
        let (rref, pivots) = self.row_reduce();
        let free: Vec<usize> = (0..self.cols).filter(|c| !pivots.contains(c)).collect();
        if free.is_empty() {
            return None;
        }
        let mut basis = Self::zeros(free.len(), self.cols).ok()?;
        for (b, &f) in free.iter().enumerate() {
            basis.set(b, f, 1);
            for (r, &p) in pivots.iter().enumerate() {
                if rref.get(r, f) == 1 {
                    basis.set(b, p, 1);
                }
            }
        }
        Some(basis)
    }

    /// Parses the dense text format: a header line `n m` followed by `m` lines
    /// of `n` whitespace-separated bits.
    pub fn parse_dense(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty());
        let (hline, header) = lines
            .next()
            .ok_or_else(|| Error::parse(1, "missing header"))?;
        let dims: Vec<usize> = header
            .split_whitespace()
            .map(|t| t.parse::<usize>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| Error::parse(hline, format!("malformed header: {e}")))?;
        let [n, m] = dims[..] else {
            return Err(Error::parse(hline, "malformed header: expected `n m`"));
        };
        let mut rows = Vec::with_capacity(m);
        for r in 0..m {
            let (lineno, line) = lines
                .next()
                .ok_or_else(|| Error::parse(hline, format!("expected {m} rows, found {r}")))?;
            let row: Vec<u8> = line
                .split_whitespace()
                .map(|t| match t {
                    "0" => Ok(0),
                    "1" => Ok(1),
                    other => Err(Error::parse(lineno, format!("`{other}` is not a bit"))),
                })
                .collect::<Result<_>>()?;
            if row.len() != n {
                return Err(Error::parse(
                    lineno,
                    format!("row has {} entries, expected {n}", row.len()),
                ));
            }
            rows.push(row);
        }
        if let Some((lineno, _)) = lines.next() {
            return Err(Error::parse(lineno, "trailing data after matrix rows"));
        }
        Self::from_rows(&rows).map_err(|e| Error::parse(hline, e.to_string()))
    }

    pub fn to_dense(&self) -> String {
        let mut s = format!("{} {}\n", self.cols, self.rows);
        for r in 0..self.rows {
            let line: Vec<&str> = self
                .row(r)
                .iter()
                .map(|&b| if b == 1 { "1" } else { "0" })
                .collect();
            s.push_str(&line.join(" "));
            s.push('\n');
        }
        s
    }
}

impl fmt::Debug for BinaryMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "BinaryMatrix {}x{} [", self.rows, self.cols)?;
        for r in 0..self.rows {
            let line: String = self.row(r).iter().map(|&b| (b'0' + b) as char).collect();
            writeln!(f, "  {line}")?;
        }
        write!(f, "]")
    }
}

/// XOR of two equal-length bit slices.
pub fn xor(a: &[u8], b: &[u8]) -> Vec<u8> {
    a.iter().zip(b).map(|(x, y)| x ^ y).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_empty_and_non_bits() {
        assert!(BinaryMatrix::zeros(0, 3).is_err());
        assert!(BinaryMatrix::from_rows(&[vec![0u8, 2]]).is_err());
        assert!(BinaryMatrix::from_rows(&[vec![0u8, 1], vec![1]]).is_err());
    }

    #[test]
    fn null_space_is_orthogonal() {
        let h = BinaryMatrix::from_rows(&[
            [1u8, 1, 0, 1, 1, 0, 0],
            [1, 0, 1, 1, 0, 1, 0],
            [0, 1, 1, 1, 0, 0, 1],
        ])
        .unwrap();
        let g = h.null_space().unwrap();
        assert_eq!(g.rows(), 4);
        assert_eq!(g.rank(), 4);
        assert!(g.mul_transpose(&h).unwrap().is_zero());
    }

    #[test]
    fn row_reduce_reports_rank() {
        let m = BinaryMatrix::from_rows(&[[1u8, 1, 0], [0, 1, 1], [1, 0, 1]]).unwrap();
        let (rref, pivots) = m.row_reduce();
        assert_eq!(pivots, vec![0, 1]);
        assert_eq!(rref.rows(), 2);
        assert_eq!(m.rank(), 2);
    }

    #[test]
    fn dense_text_round_trip() {
        let m = BinaryMatrix::from_rows(&[[1u8, 0, 1], [0, 1, 1]]).unwrap();
        let text = m.to_dense();
        assert_eq!(text, "3 2\n1 0 1\n0 1 1\n");
        assert_eq!(BinaryMatrix::parse_dense(&text).unwrap(), m);
    }

    #[test]
    fn dense_text_errors_carry_line_numbers() {
        let err = BinaryMatrix::parse_dense("3 2\n1 0 1\n0 1\n").unwrap_err();
        assert!(err.to_string().contains("line 3"), "{err}");
        let err = BinaryMatrix::parse_dense("3 2\n1 0 1\n0 1 7\n").unwrap_err();
        assert!(err.to_string().contains("line 3"), "{err}");
    }

    #[test]
    fn vector_products() {
        let m = BinaryMatrix::from_rows(&[[1u8, 1, 0], [0, 1, 1]]).unwrap();
        assert_eq!(m.mul_vec(&[1, 1, 1]), vec![0, 0]);
        assert_eq!(m.vec_mul(&[1, 1]), vec![1, 0, 1]);
        assert_eq!(m.permute_columns(&[2, 1, 0]).row(0), &[0, 1, 1]);
    }
}
