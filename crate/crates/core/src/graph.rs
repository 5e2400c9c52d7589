//! Graph storage, re-normalized adjacency, Laplacian and sparse-dense products.
//!
//! Everything downstream is built from three matrices:
//!
//! * `A`, the (optionally weighted) symmetric adjacency with zero diagonal,
//! * `Â = (D+I)^{-1/2} (A+I) (D+I)^{-1/2}`, the self-loop re-normalized adjacency,
//! * `L̂ = I − Â`, whose spectrum lies in `[0, 2]`.
//!
//! [`SparseSym`] stores both triangles in compressed-row form so that
//! [`spmm`] is a plain row-parallel loop with a fixed per-row summation order.

use rayon::prelude::*;

use crate::dense::DenseMatrix;
use crate::error::{Error, Result};

const SYMMETRY_TOL: f64 = 1e-12;

/// Undirected edges over nodes `0..n`, each with a weight (1.0 for binary graphs).
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeList {
    n: usize,
    pairs: Vec<(usize, usize)>,
    weights: Vec<f64>,
}

impl EdgeList {
    /// Unit-weight edges. Endpoints must lie in `0..n`.
    pub fn new(n: usize, pairs: Vec<(usize, usize)>) -> Result<Self> {
        let weights = vec![1.0; pairs.len()];
        EdgeList::weighted(n, pairs, weights)
    }

    pub fn weighted(n: usize, pairs: Vec<(usize, usize)>, weights: Vec<f64>) -> Result<Self> {
        if pairs.len() != weights.len() {
            return Err(Error::contract("one weight per edge required"));
        }
        for (idx, &(u, v)) in pairs.iter().enumerate() {
            if u >= n || v >= n {
                return Err(Error::input(format!(
                    "edge #{idx} ({u}, {v}) has an endpoint outside 0..{n}"
                )));
            }
        }
        if let Some(idx) = weights.iter().position(|w| !w.is_finite() || *w < 0.0) {
            return Err(Error::input(format!("edge #{idx} has invalid weight {}", weights[idx])));
        }
        Ok(EdgeList { n, pairs, weights })
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn pairs(&self) -> &[(usize, usize)] {
        &self.pairs
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    /// Every pair stored as `(min, max)`, sorted, self-loops removed and
    /// duplicates collapsed onto their first occurrence.
    pub fn canonicalize(&self) -> EdgeList {
        let mut seen = std::collections::HashSet::with_capacity(self.pairs.len());
        let mut kept: Vec<((usize, usize), f64)> = Vec::with_capacity(self.pairs.len());
        for (&(u, v), &w) in self.pairs.iter().zip(&self.weights) {
            if u == v {
                continue;
            }
            let key = (u.min(v), u.max(v));
            if seen.insert(key) {
                kept.push((key, w));
            }
        }
        kept.sort_by_key(|&(k, _)| k);
        let (pairs, weights) = kept.into_iter().unzip();
        EdgeList {
            n: self.n,
            pairs,
            weights,
        }
    }

    pub fn is_canonical(&self) -> bool {
        self.pairs.iter().all(|&(u, v)| u < v) && self.pairs.windows(2).all(|w| w[0] < w[1])
    }
}

/// Symmetric `n × n` matrix in compressed-row form, both triangles stored.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseSym {
    n: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
}

impl SparseSym {
    /// Builds from `(row, col, value)` triplets, which must already contain both
    /// `(i, j)` and `(j, i)` with matching values. Duplicates are rejected.
    pub fn from_triplets(n: usize, triplets: &[(usize, usize, f64)]) -> Result<Self> {
        let mut sorted: Vec<(usize, usize, f64)> = triplets.to_vec();
        for &(i, j, v) in &sorted {
            if i >= n || j >= n {
                return Err(Error::contract(format!("entry ({i}, {j}) outside {n}x{n}")));
            }
            if !v.is_finite() {
                return Err(Error::numeric(format!("non-finite entry at ({i}, {j})")));
            }
        }
        sorted.sort_by_key(|a| (a.0, a.1));
        if let Some(w) = sorted.windows(2).find(|w| (w[0].0, w[0].1) == (w[1].0, w[1].1)) {
            return Err(Error::contract(format!("duplicate entry ({}, {})", w[0].0, w[0].1)));
        }
        let mut row_ptr = vec![0usize; n + 1];
        for &(i, _, _) in &sorted {
            row_ptr[i + 1] += 1;
        }
        for i in 0..n {
            row_ptr[i + 1] += row_ptr[i];
        }
        let m = SparseSym {
            n,
            row_ptr,
            col_idx: sorted.iter().map(|t| t.1).collect(),
            values: sorted.iter().map(|t| t.2).collect(),
        };
        m.check_symmetric()?;
        Ok(m)
    }

    /// Symmetric matrix from a dense one, keeping nonzero entries.
    pub fn from_dense(m: &DenseMatrix) -> Result<Self> {
        if m.rows() != m.cols() {
            return Err(Error::contract("from_dense: matrix is not square"));
        }
        let mut t = Vec::new();
        for i in 0..m.rows() {
            for (j, &v) in m.row(i).iter().enumerate() {
                if v != 0.0 {
                    t.push((i, j, v));
                }
            }
        }
        SparseSym::from_triplets(m.rows(), &t)
    }

    pub fn identity(n: usize) -> Self {
        SparseSym {
            n,
            row_ptr: (0..=n).collect(),
            col_idx: (0..n).collect(),
            values: vec![1.0; n],
        }
    }

    pub fn zeros(n: usize) -> Self {
        SparseSym {
            n,
            row_ptr: vec![0; n + 1],
            col_idx: Vec::new(),
            values: Vec::new(),
        }
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    /// Column indices and values of row `i`, columns ascending.
    #[inline]
    pub fn row(&self, i: usize) -> (&[usize], &[f64]) {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        (&self.col_idx[r.clone()], &self.values[r])
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (cols, vals) = self.row(i);
        cols.binary_search(&j).map_or(0.0, |k| vals[k])
    }

    /// Row sums.
    pub fn row_sums(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.row(i).1.iter().sum()).collect()
    }

    pub fn to_dense(&self) -> DenseMatrix {
        let mut d = DenseMatrix::zeros(self.n, self.n);
        for i in 0..self.n {
            let (cols, vals) = self.row(i);
            for (&j, &v) in cols.iter().zip(vals) {
                d.set(i, j, v);
            }
        }
        d
    }

    pub fn check_symmetric(&self) -> Result<()> {
        for i in 0..self.n {
            let (cols, vals) = self.row(i);
            for (&j, &v) in cols.iter().zip(vals) {
                let (tc, tv) = self.row(j);
                match tc.binary_search(&i) {
                    Ok(k) if (tv[k] - v).abs() <= SYMMETRY_TOL => {}
                    Ok(k) => {
                        return Err(Error::contract(format!(
                            "asymmetric values at ({i}, {j}): {v} vs {}",
                            tv[k]
                        )))
                    }
                    Err(_) => return Err(Error::contract(format!("entry ({i}, {j}) has no mirror ({j}, {i})"))),
                }
            }
        }
        Ok(())
    }
}

/// Binary (or weighted) symmetric adjacency of an edge list; zero diagonal.
pub fn build_adjacency(edges: &EdgeList) -> Result<SparseSym> {
    let n = edges.n();
    for (idx, &(u, v)) in edges.pairs().iter().enumerate() {
        if u >= n || v >= n {
            return Err(Error::input(format!(
                "edge #{idx} ({u}, {v}) has an endpoint outside 0..{n}"
            )));
        }
    }
    let canon = edges.canonicalize();
    let mut t = Vec::with_capacity(2 * canon.len());
    for (&(u, v), &w) in canon.pairs().iter().zip(canon.weights()) {
        t.push((u, v, w));
        t.push((v, u, w));
    }
    SparseSym::from_triplets(n, &t)
}

/// `Â = (D+I)^{-1/2} (A+I) (D+I)^{-1/2}` with weighted degrees `D`.
pub fn normalize_adjacency(a: &SparseSym) -> Result<SparseSym> {
    a.check_symmetric()?;
    let n = a.n();
    for i in 0..n {
        let (cols, vals) = a.row(i);
        for (&j, &v) in cols.iter().zip(vals) {
            if i == j && v != 0.0 {
                return Err(Error::contract(format!("adjacency has diagonal entry at {i}")));
            }
            if v < 0.0 {
                return Err(Error::contract(format!("negative adjacency weight at ({i}, {j})")));
            }
        }
    }
    let shifted: Vec<f64> = a.row_sums().into_iter().map(|d| d + 1.0).collect();
    let mut row_ptr = Vec::with_capacity(n + 1);
    let mut col_idx = Vec::with_capacity(a.nnz() + n);
    let mut values = Vec::with_capacity(a.nnz() + n);
    row_ptr.push(0);
    for i in 0..n {
        let (cols, vals) = a.row(i);
        let mut diag_done = false;
        for (&j, &v) in cols.iter().zip(vals) {
            if j == i {
                continue;
            }
            if !diag_done && j > i {
                col_idx.push(i);
                values.push(1.0 / shifted[i]);
                diag_done = true;
            }
            col_idx.push(j);
            // (d_i+1)(d_j+1) is commutative, so the two triangles agree bit for bit.
            values.push(v / (shifted[i] * shifted[j]).sqrt());
        }
        if !diag_done {
            col_idx.push(i);
            values.push(1.0 / shifted[i]);
        }
        row_ptr.push(col_idx.len());
    }
    Ok(SparseSym {
        n,
        row_ptr,
        col_idx,
        values,
    })
}

/// `L̂ = I − Â`. Entries that cancel to exactly zero are dropped.
pub fn laplacian(ahat: &SparseSym) -> SparseSym {
    let n = ahat.n();
    let mut t = Vec::with_capacity(ahat.nnz() + n);
    for i in 0..n {
        let (cols, vals) = ahat.row(i);
        let mut has_diag = false;
        for (&j, &v) in cols.iter().zip(vals) {
            let x = if i == j {
                has_diag = true;
                1.0 - v
            } else {
                -v
            };
            if x != 0.0 {
                t.push((i, j, x));
            }
        }
        if !has_diag {
            t.push((i, i, 1.0));
        }
    }
    // Entries come from a symmetric matrix, so rebuilding cannot fail.
    SparseSym::from_triplets(n, &t).expect("laplacian of a symmetric matrix is symmetric")
}

/// Sparse-dense product `S · M`, parallel over output rows.
///
/// Each output row is accumulated in ascending column order of `S`, so the
/// result does not depend on how rows are scheduled across threads.
pub fn spmm(s: &SparseSym, m: &DenseMatrix) -> Result<DenseMatrix> {
    if s.n() != m.rows() {
        return Err(Error::contract(format!(
            "spmm: {}x{} sparse times {}x{} dense",
            s.n(),
            s.n(),
            m.rows(),
            m.cols()
        )));
    }
    let d = m.cols();
    let mut out = DenseMatrix::zeros(s.n(), d);
    if d == 0 {
        return Ok(out);
    }
    out.as_mut_slice().par_chunks_mut(d).enumerate().for_each(|(i, dst)| {
        let (cols, vals) = s.row(i);
        for (&j, &v) in cols.iter().zip(vals) {
            for (o, x) in dst.iter_mut().zip(m.row(j)) {
                *o += v * x;
            }
        }
    });
    Ok(out)
}

/// `alpha·S·M + beta·M`, the shifted product used by polynomial recurrences.
pub(crate) fn spmm_shift(s: &SparseSym, m: &DenseMatrix, alpha: f64, beta: f64) -> Result<DenseMatrix> {
    let mut out = spmm(s, m)?;
    out.scale(alpha);
    out.axpy(beta, m)?;
    Ok(out)
}

/// Power-iteration estimate of the spectral radius of `S`.
pub fn spectral_radius_estimate(s: &SparseSym, iterations: usize) -> f64 {
    let n = s.n();
    if n == 0 {
        return 0.0;
    }
    // Fixed, non-symmetric start vector so the estimate is reproducible.
    let mut v = DenseMatrix::from_fn(n, 1, |i, _| 1.0 + ((i * 7919) % 101) as f64 / 101.0);
    let norm = v.frobenius_norm();
    v.scale(1.0 / norm);
    let mut lambda = 0.0;
    for _ in 0..iterations {
        let w = spmm(s, &v).expect("shapes agree");
        let nw = w.frobenius_norm();
        if nw == 0.0 {
            return 0.0;
        }
        lambda = nw;
        v = w.scaled(1.0 / nw);
    }
    lambda
}
