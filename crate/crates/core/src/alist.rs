//! Reader and writer for the alist sparse-matrix format.
//!
//! Layout (all indices 1-based, zero entries in index lists are padding):
//!
//! ```text
//! n m                     columns, rows
//! max_col_deg max_row_deg
//! <n column degrees>
//! <m row degrees>
//! <n lines: row indices of each column>
//! <m lines: column indices of each row>
//! ```

use std::collections::BTreeSet;

use crate::error::{Error, Result};
use crate::gf2::BinaryMatrix;

struct Lines<'a> {
    inner: Box<dyn Iterator<Item = (usize, &'a str)> + 'a>,
    last: usize,
}

impl<'a> Lines<'a> {
    fn new(text: &'a str) -> Self {
        Self {
            inner: Box::new(
                text.lines()
                    .enumerate()
                    .map(|(i, l)| (i + 1, l.trim()))
                    .filter(|(_, l)| !l.is_empty()),
            ),
            last: 0,
        }
    }

    fn numbers(&mut self, what: &str) -> Result<(usize, Vec<usize>)> {
        let (lineno, line) = self
            .inner
            .next()
            .ok_or_else(|| Error::parse(self.last + 1, format!("unexpected end of input, expected {what}")))?;
        self.last = lineno;
        let nums = line
            .split_whitespace()
            .map(|t| {
                t.parse::<usize>()
                    .map_err(|_| Error::parse(lineno, format!("`{t}` is not a non-negative integer in {what}")))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok((lineno, nums))
    }
}

/// Parses alist text into a dense matrix, cross-checking the column lists
/// against the row lists.
pub fn parse_alist(text: &str) -> Result<BinaryMatrix> {
    let mut lines = Lines::new(text);

    let (hl, header) = lines.numbers("header")?;
    let [n, m] = header[..] else {
        return Err(Error::parse(hl, "malformed header: expected `n m`"));
    };
    if n == 0 || m == 0 {
        return Err(Error::parse(hl, "malformed header: dimensions must be positive"));
    }
    let (dl, maxdeg) = lines.numbers("maximum degrees")?;
    let [max_col, max_row] = maxdeg[..] else {
        return Err(Error::parse(dl, "malformed header: expected two maximum degrees"));
    };
    let (cl, col_deg) = lines.numbers("column degrees")?;
    if col_deg.len() != n {
        return Err(Error::parse(cl, format!("expected {n} column degrees, found {}", col_deg.len())));
    }
    let (rl, row_deg) = lines.numbers("row degrees")?;
    if row_deg.len() != m {
        return Err(Error::parse(rl, format!("expected {m} row degrees, found {}", row_deg.len())));
    }
    if col_deg.iter().copied().max() != Some(max_col) {
        return Err(Error::parse(dl, "maximum column degree disagrees with column degree list"));
    }
    if row_deg.iter().copied().max() != Some(max_row) {
        return Err(Error::parse(dl, "maximum row degree disagrees with row degree list"));
    }

    let mut from_cols = BTreeSet::new();
    for (c, &deg) in col_deg.iter().enumerate() {
        let (lineno, idx) = lines.numbers("column index list")?;
        let entries = read_list(lineno, &idx, deg, m, "row")?;
        for r in entries {
            from_cols.insert((r, c));
        }
    }
    let mut from_rows = BTreeSet::new();
    for (r, &deg) in row_deg.iter().enumerate() {
        let (lineno, idx) = lines.numbers("row index list")?;
        let entries = read_list(lineno, &idx, deg, n, "column")?;
        for c in entries {
            if !from_cols.contains(&(r, c)) {
                return Err(Error::parse(
                    lineno,
                    format!("row/column adjacency mismatch: entry ({}, {}) missing from column lists", r + 1, c + 1),
                ));
            }
            from_rows.insert((r, c));
        }
    }
    if let Some(&(r, c)) = from_cols.difference(&from_rows).next() {
        return Err(Error::parse(
            lines.last,
            format!("row/column adjacency mismatch: entry ({}, {}) missing from row lists", r + 1, c + 1),
        ));
    }

    let mut h = BinaryMatrix::zeros(m, n)?;
    for (r, c) in from_rows {
        h.set(r, c, 1);
    }
    Ok(h)
}

fn read_list(lineno: usize, idx: &[usize], deg: usize, bound: usize, kind: &str) -> Result<Vec<usize>> {
    let entries: Vec<usize> = idx.iter().copied().filter(|&i| i != 0).collect();
    if entries.len() != deg {
        return Err(Error::parse(
            lineno,
            format!("degree list says {deg} entries, found {}", entries.len()),
        ));
    }
    let mut seen = BTreeSet::new();
    for &i in &entries {
        if i > bound {
            return Err(Error::parse(lineno, format!("{kind} index {i} out of range 1..={bound}")));
        }
        if !seen.insert(i) {
            return Err(Error::parse(lineno, format!("duplicate {kind} index {i}")));
        }
    }
    Ok(entries.into_iter().map(|i| i - 1).collect())
}

/// Serializes a matrix to alist text (no zero padding).
pub fn write_alist(h: &BinaryMatrix) -> String {
    let (m, n) = (h.rows(), h.cols());
    let cols: Vec<Vec<usize>> = (0..n)
        .map(|c| (0..m).filter(|&r| h.get(r, c) == 1).map(|r| r + 1).collect())
        .collect();
    let rows: Vec<Vec<usize>> = (0..m)
        .map(|r| (0..n).filter(|&c| h.get(r, c) == 1).map(|c| c + 1).collect())
        .collect();
    let join = |v: &[usize]| v.iter().map(usize::to_string).collect::<Vec<_>>().join(" ");
    let degs = |l: &[Vec<usize>]| l.iter().map(Vec::len).collect::<Vec<_>>();
    let col_deg = degs(&cols);
    let row_deg = degs(&rows);
    let mut out = format!("{n} {m}\n");
    out.push_str(&format!(
        "{} {}\n",
        col_deg.iter().max().unwrap_or(&0),
        row_deg.iter().max().unwrap_or(&0)
    ));
    out.push_str(&join(&col_deg));
    out.push('\n');
    out.push_str(&join(&row_deg));
    out.push('\n');
    for l in cols.iter().chain(rows.iter()) {
        out.push_str(&join(l));
        out.push('\n');
    }
    out
}
