//! Built-in code constructions and code loading.
//!
//! Identifiers are case-insensitive, e.g. `BCH_63_51`, `bch(31,16)`,
//! `POLAR_64_32`, `HAMMING_7_4`, `SPC_4_3`. BCH parity-check matrices are the
//! `n - k` cyclic shifts of the reciprocal check polynomial; polar codes use
//! the Kronecker kernel with the frozen set chosen by BEC Bhattacharyya
//! parameters.

use std::path::Path;

use crate::alist::parse_alist;
use crate::code::ParityCheckCode;
use crate::error::{Error, Result};
use crate::gf2::BinaryMatrix;

/// Default primitive polynomials (bit `i` is the coefficient of `x^i`).
const PRIMITIVE: [(u32, u32); 8] = [
    (3, 0b1011),
    (4, 0b1_0011),
    (5, 0b10_0101),
    (6, 0b100_0011),
    (7, 0b1000_1001),
    (8, 0b1_0001_1101),
    (9, 0b10_0001_0001),
    (10, 0b100_0000_1001),
];

/// Resolves a catalog identifier into a code.
pub fn resolve(id: &str) -> Result<ParityCheckCode> {
    let norm: String = id
        .to_ascii_uppercase()
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() { c } else { '_' })
        .collect();
    let parts: Vec<&str> = norm.split('_').filter(|p| !p.is_empty()).collect();
    if parts.is_empty() {
        return Err(Error::UnknownCode(id.to_string()));
    }
    let nums: Vec<usize> = parts[1..]
        .iter()
        .map(|p| p.parse::<usize>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|_| Error::UnknownCode(id.to_string()))?;
    let code = match (parts.first().copied(), nums.as_slice()) {
        (Some("BCH"), &[n, k]) => bch(n, k)?,
        (Some("POLAR"), &[n, k]) => polar(n, k)?,
        (Some("HAMMING"), &[n, k]) => {
            let m = n - k.min(n);
            if m < 2 || n != (1 << m) - 1 {
                return Err(Error::UnknownCode(id.to_string()));
            }
            hamming(m as u32)?
        }
        (Some("SPC"), &[n]) | (Some("SPC"), &[n, _]) => single_parity_check(n)?,
        _ => return Err(Error::UnknownCode(id.to_string())),
    };
    if let (Some("SPC"), &[n, k]) = (parts.first().copied(), nums.as_slice()) {
        if k + 1 != n {
            return Err(Error::UnknownCode(id.to_string()));
        }
    }
    Ok(code.with_name(canonical_name(&parts)))
}

fn canonical_name(parts: &[&str]) -> String {
    parts.join("_")
}

/// Loads a code from either a catalog identifier or a matrix file (alist or
/// dense text), with an optional generator file.
pub fn load(spec: &str, generator: Option<&Path>) -> Result<ParityCheckCode> {
    let path = Path::new(spec);
    if !path.exists() {
        if generator.is_some() {
            return Err(Error::Config(format!(
                "--gen given but `{spec}` is not a file"
            )));
        }
        return resolve(spec);
    }
    let h = read_matrix(path)?;
    let code = match generator {
        Some(gpath) => ParityCheckCode::standardize(&read_matrix(gpath)?, &h)?,
        None => ParityCheckCode::from_parity_check(&h)?,
    };
    let name = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| spec.to_string());
    Ok(code.with_name(name))
}

/// Reads an alist or dense-text matrix file. Files ending in `.alist` are
/// always parsed as alist; others are tried as alist first, then dense.
pub fn read_matrix(path: &Path) -> Result<BinaryMatrix> {
    let text = std::fs::read_to_string(path)?;
    if path.extension().is_some_and(|e| e == "alist") {
        return parse_alist(&text);
    }
    parse_alist(&text).or_else(|alist_err| {
        BinaryMatrix::parse_dense(&text).map_err(|dense_err| {
            Error::Config(format!(
                "{}: not alist ({alist_err}) nor dense text ({dense_err})",
                path.display()
            ))
        })
    })
}

pub fn single_parity_check(n: usize) -> Result<ParityCheckCode> {
    if n < 2 {
        return Err(Error::Config("single parity-check code needs n >= 2".into()));
    }
    let h = BinaryMatrix::from_rows(&[vec![1u8; n]])?;
    ParityCheckCode::from_parity_check(&h)
}

/// Hamming code of length `2^m - 1`, parity-check matrix laid out as
/// `[Pᵀ | I]`.
pub fn hamming(m: u32) -> Result<ParityCheckCode> {
    let n = (1usize << m) - 1;
    let mut cols: Vec<usize> = (1..=n).filter(|v| !v.is_power_of_two()).collect();
    cols.extend((0..m).map(|b| 1usize << b));
    let rows: Vec<Vec<u8>> = (0..m as usize)
        .map(|b| cols.iter().map(|&c| ((c >> b) & 1) as u8).collect())
        .collect();
    ParityCheckCode::from_parity_check(&BinaryMatrix::from_rows(&rows)?)
}

struct Gf2m {
    exp: Vec<usize>,
    log: Vec<usize>,
    order: usize,
}

impl Gf2m {
    fn new(m: u32) -> Result<Self> {
        let poly = PRIMITIVE
            .iter()
            .find(|(deg, _)| *deg == m)
            .map(|(_, p)| *p as usize)
            .ok_or_else(|| Error::Config(format!("no primitive polynomial for GF(2^{m})")))?;
        let order = (1usize << m) - 1;
        let mut exp = vec![0; 2 * order];
        let mut log = vec![0; order + 1];
        let mut x = 1usize;
        for i in 0..order {
            exp[i] = x;
            log[x] = i;
            x <<= 1;
            if x >> m != 0 {
                x ^= poly;
            }
        }
        for i in order..2 * order {
            exp[i] = exp[i - order];
        }
        Ok(Self { exp, log, order })
    }

    /// Binary minimal polynomial of `α^i` and its cyclotomic coset.
    fn minimal_polynomial(&self, i: usize) -> (Vec<u8>, Vec<usize>) {
        let mut coset = Vec::new();
        let mut j = i % self.order;
        while !coset.contains(&j) {
            coset.push(j);
            j = (2 * j) % self.order;
        }
        // coefficients in GF(2^m), lowest degree first
        let mut p = vec![1usize];
        for &c in &coset {
            let mut q = vec![0usize; p.len() + 1];
            for (k, &a) in p.iter().enumerate() {
                q[k + 1] ^= a;
                if a != 0 {
                    q[k] ^= self.exp[(self.log[a] + c) % self.order];
                }
            }
            p = q;
        }
        let bits = p
            .into_iter()
            .map(|a| {
                debug_assert!(a <= 1, "minimal polynomial must be binary");
                a as u8
            })
            .collect();
        (bits, coset)
    }
}

fn poly_mul(a: &[u8], b: &[u8]) -> Vec<u8> {
    let mut r = vec![0u8; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        if x == 1 {
            for (j, &y) in b.iter().enumerate() {
                r[i + j] ^= y;
            }
        }
    }
    r
}

/// Quotient of binary polynomial division; the remainder must be zero.
fn poly_div_exact(num: &[u8], den: &[u8]) -> Vec<u8> {
    let mut rem = num.to_vec();
    let dd = den.len() - 1;
    let mut q = vec![0u8; num.len() - dd];
    for i in (0..q.len()).rev() {
        if rem[i + dd] == 1 {
            q[i] = 1;
            for (j, &d) in den.iter().enumerate() {
                rem[i + j] ^= d;
            }
        }
    }
    debug_assert!(rem.iter().all(|&b| b == 0));
    q
}

/// Narrow-sense primitive binary BCH code. `k` must be reachable by some
/// designed distance.
pub fn bch(n: usize, k: usize) -> Result<ParityCheckCode> {
    let m = (n + 1).trailing_zeros();
    if n + 1 != 1 << m || k == 0 || k >= n {
        return Err(Error::UnknownCode(format!("BCH_{n}_{k}")));
    }
    let field = Gf2m::new(m)?;
    let mut gpoly = vec![1u8];
    let mut used: Vec<usize> = Vec::new();
    let mut i = 1;
    while gpoly.len() - 1 < n - k && i < n {
        let (mp, coset) = field.minimal_polynomial(i);
        let rep = *coset.iter().min().unwrap();
        if !used.contains(&rep) {
            used.push(rep);
            gpoly = poly_mul(&gpoly, &mp);
        }
        i += 1;
    }
    if gpoly.len() - 1 != n - k {
        return Err(Error::UnknownCode(format!("BCH_{n}_{k}")));
    }
    let mut xn1 = vec![0u8; n + 1];
    xn1[0] = 1;
    xn1[n] = 1;
    let hpoly = poly_div_exact(&xn1, &gpoly);
    let hrev: Vec<u8> = hpoly.iter().rev().copied().collect();

    let mut h = BinaryMatrix::zeros(n - k, n)?;
    for r in 0..n - k {
        for (j, &b) in hrev.iter().enumerate() {
            h.set(r, r + j, b);
        }
    }
    let mut g = BinaryMatrix::zeros(k, n)?;
    for r in 0..k {
        for (j, &b) in gpoly.iter().enumerate() {
            g.set(r, r + j, b);
        }
    }
    ParityCheckCode::standardize(&g, &h)
}

/// Bhattacharyya parameters of the synthetic channels of a length-`n` polar
/// transform over a BEC with erasure probability `z0`.
pub fn polar_bhattacharyya(n: usize, z0: f64) -> Vec<f64> {
    let mut z = vec![z0];
    while z.len() < n {
        z = z.iter().flat_map(|&x| [2.0 * x - x * x, x * x]).collect();
    }
    z
}

/// Polar code with kernel `[[1,0],[1,1]]^{⊗log2 n}` (no bit reversal).
pub fn polar(n: usize, k: usize) -> Result<ParityCheckCode> {
    if !n.is_power_of_two() || n < 2 || k == 0 || k >= n {
        return Err(Error::UnknownCode(format!("POLAR_{n}_{k}")));
    }
    let z = polar_bhattacharyya(n, 0.5);
    let mut order: Vec<usize> = (0..n).collect();
    // least reliable first; ties freeze the lower index
    order.sort_by(|&a, &b| z[b].total_cmp(&z[a]).then(a.cmp(&b)));
    let mut frozen = order[..n - k].to_vec();
    frozen.sort_unstable();
    let info: Vec<usize> = (0..n).filter(|i| !frozen.contains(i)).collect();

    // G_N[i][j] = 1 iff the bits of j are a subset of the bits of i
    let kernel = |i: usize, j: usize| u8::from(i & j == j);
    let mut g = BinaryMatrix::zeros(k, n)?;
    for (r, &i) in info.iter().enumerate() {
        for j in 0..n {
            g.set(r, j, kernel(i, j));
        }
    }
    let mut h = BinaryMatrix::zeros(n - k, n)?;
    for (r, &f) in frozen.iter().enumerate() {
        for j in 0..n {
            h.set(r, j, kernel(j, f));
        }
    }
    ParityCheckCode::standardize(&g, &h)
}
