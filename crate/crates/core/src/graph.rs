//! Edge-indexed Tanner graph used by every message-passing decoder.
//!
//! Edge ids are assigned by scanning the parity-check matrix row-major. Every
//! per-edge parameter vector (marginalization weights, persisted models)
//! depends on this ordering.

use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::gf2::BinaryMatrix;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EdgeGraph {
    n: usize,
    m: usize,
    /// `(check, variable)` per edge id.
    edges: Vec<(usize, usize)>,
    var_neighbors: Vec<Vec<usize>>,
    check_neighbors: Vec<Vec<usize>>,
    d_max: usize,
}

impl EdgeGraph {
    pub fn build(h: &BinaryMatrix) -> Result<Self> {
        let (m, n) = (h.rows(), h.cols());
        let mut edges = Vec::with_capacity(h.count_ones());
        let mut var_neighbors = vec![Vec::new(); n];
        let mut check_neighbors = vec![Vec::new(); m];
        for c in 0..m {
            for v in 0..n {
                if h.get(c, v) == 1 {
                    let e = edges.len();
                    edges.push((c, v));
                    var_neighbors[v].push(e);
                    check_neighbors[c].push(e);
                }
            }
        }
        if let Some(v) = var_neighbors.iter().position(Vec::is_empty) {
            return Err(Error::DegenerateNode(format!("variable {v} has no checks")));
        }
        if let Some(c) = check_neighbors.iter().position(Vec::is_empty) {
            return Err(Error::DegenerateNode(format!("check {c} has no variables")));
        }
        let d_max = var_neighbors.iter().map(Vec::len).max().unwrap_or(0);
        Ok(Self {
            n,
            m,
            edges,
            var_neighbors,
            check_neighbors,
            d_max,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn num_checks(&self) -> usize {
        self.m
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    #[inline]
    pub fn edge_var(&self, e: usize) -> usize {
        self.edges[e].1
    }

    #[inline]
    pub fn edge_check(&self, e: usize) -> usize {
        self.edges[e].0
    }

    pub fn var_neighbors(&self, v: usize) -> &[usize] {
        &self.var_neighbors[v]
    }

    pub fn check_neighbors(&self, c: usize) -> &[usize] {
        &self.check_neighbors[c]
    }

    /// Largest variable degree.
    pub fn d_max(&self) -> usize {
        self.d_max
    }

    /// Per-edge broadcast of a per-variable quantity.
    pub fn lift(&self, per_var: &[f64]) -> Vec<f64> {
        assert_eq!(per_var.len(), self.n);
        self.edges.iter().map(|&(_, v)| per_var[v]).collect()
    }

    /// Sum of per-edge values into their variables (adjoint of [`lift`]).
    ///
    /// [`lift`]: Self::lift
    pub fn marginalize_sum(&self, per_edge: &[f64]) -> Vec<f64> {
        assert_eq!(per_edge.len(), self.edges.len());
        let mut out = vec![0.0; self.n];
        for (&(_, v), &x) in self.edges.iter().zip(per_edge) {
            out[v] += x;
        }
        out
    }

    /// Hex SHA-256 over the dimensions and the ordered edge list.
    pub fn fingerprint(&self) -> String {
        let mut hasher = Sha256::new();
        hasher.update((self.n as u64).to_le_bytes());
        hasher.update((self.m as u64).to_le_bytes());
        for &(c, v) in &self.edges {
            hasher.update((c as u32).to_le_bytes());
            hasher.update((v as u32).to_le_bytes());
        }
        hex::encode(hasher.finalize())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;
    use proptest::prelude::*;

    fn small() -> EdgeGraph {
        EdgeGraph::build(&BinaryMatrix::from_rows(&[[1u8, 1, 0], [0, 1, 1]]).unwrap()).unwrap()
    }

    #[test]
    fn enumerates_edges_row_major() {
        let g = small();
        assert_eq!(g.edges(), &[(0, 0), (0, 1), (1, 1), (1, 2)]);
        assert_eq!(g.num_edges(), 4);
        assert_eq!(g.var_neighbors(1), &[1, 2]);
        assert_eq!(g.check_neighbors(1), &[2, 3]);
        assert_eq!(g.d_max(), 2);
    }

    #[test]
    fn rejects_empty_columns() {
        let h = BinaryMatrix::from_rows(&[[1u8, 0], [1, 0]]).unwrap();
        let err = EdgeGraph::build(&h).unwrap_err();
        assert!(err.to_string().contains("degenerate node"), "{err}");
    }

    #[test]
    fn lift_and_sum_examples() {
        let g = small();
        assert_eq!(g.lift(&[10.0, 20.0, 30.0]), vec![10.0, 20.0, 20.0, 30.0]);
        assert_eq!(g.lift(&[0.0; 3]), vec![0.0; 4]);
        assert_eq!(g.marginalize_sum(&[1.0, 2.0, 4.0, 8.0]), vec![1.0, 6.0, 8.0]);
        assert_eq!(g.marginalize_sum(&[0.0; 4]), vec![0.0; 3]);
    }

    #[test]
    fn bch_edge_count_matches_degree_lists() {
        let code = catalog::resolve("BCH_63_51").unwrap();
        let h = code.parity_check();
        let g = EdgeGraph::build(h).unwrap();
        assert_eq!(g.num_edges(), h.count_ones());
        // degree lists as they would appear in an alist header
        let alist = crate::alist::write_alist(h);
        let col_degs: usize = alist.lines().nth(2).unwrap().split_whitespace().map(|t| t.parse::<usize>().unwrap()).sum();
        assert_eq!(g.num_edges(), col_degs);
        let total_var: usize = (0..g.n()).map(|v| g.var_neighbors(v).len()).sum();
        let total_chk: usize = (0..g.num_checks()).map(|c| g.check_neighbors(c).len()).sum();
        assert_eq!(total_var, g.num_edges());
        assert_eq!(total_chk, g.num_edges());
        let mut seen = vec![0; g.num_edges()];
        for v in 0..g.n() {
            for &e in g.var_neighbors(v) {
                seen[e] += 1;
            }
        }
        assert!(seen.iter().all(|&s| s == 1));
    }

    #[test]
    fn build_is_deterministic() {
        let code = catalog::resolve("POLAR_64_32").unwrap();
        let a = EdgeGraph::build(code.parity_check()).unwrap();
        let b = EdgeGraph::build(code.parity_check()).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.fingerprint(), b.fingerprint());
        assert_ne!(a.fingerprint(), small().fingerprint());
    }

    proptest! {
        #[test]
        fn lift_and_sum_are_adjoint(
            a in prop::collection::vec(-10.0f64..10.0, 7),
            b in prop::collection::vec(-10.0f64..10.0, 12),
        ) {
            let code = catalog::resolve("HAMMING_7_4").unwrap();
            let g = EdgeGraph::build(code.parity_check()).unwrap();
            prop_assume!(g.num_edges() == 12);
            let lhs: f64 = g.lift(&a).iter().zip(&b).map(|(x, y)| x * y).sum();
            let rhs: f64 = a.iter().zip(g.marginalize_sum(&b)).map(|(x, y)| x * y).sum();
            prop_assert!((lhs - rhs).abs() < 1e-9 * (1.0 + lhs.abs()));

            let degrees: Vec<f64> = (0..7).map(|v| g.var_neighbors(v).len() as f64).collect();
            let round = g.marginalize_sum(&g.lift(&a));
            for v in 0..7 {
                prop_assert!((round[v] - degrees[v] * a[v]).abs() < 1e-12);
            }
        }
    }
}
