//! Polynomial feature subspaces `Φ_t = P_t(L̂)X` and their assembly into a feature space.
//!
//! Three bases are supported:
//!
//! | basis      | `Φ_t`                                                         |
//! |------------|---------------------------------------------------------------|
//! | monomial   | `L̂^t X`                                                       |
//! | Chebyshev  | `Φ_0 = X`, `Φ_1 = L̂X`, `Φ_t = 2L̂Φ_{t−1} − Φ_{t−2}`              |
//! | Bernstein  | `2^{−K} C(K,t) (2I − L̂)^{K−t} L̂^t X`                          |
//!
//! Powers of `L̂` are never formed; every block is a chain of sparse-dense products.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dense::DenseMatrix;
use crate::error::{Error, Result};
use crate::graph::{spmm, spmm_shift, SparseSym};

/// Columns with an L2 norm at or below this are left untouched by [`column_normalize`].
pub const ZERO_COLUMN_EPS: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PolyBasis {
    Monomial,
    Chebyshev,
    Bernstein,
}

impl PolyBasis {
    pub const ALL: [PolyBasis; 3] = [PolyBasis::Monomial, PolyBasis::Chebyshev, PolyBasis::Bernstein];
}

impl fmt::Display for PolyBasis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PolyBasis::Monomial => "monomial",
            PolyBasis::Chebyshev => "chebyshev",
            PolyBasis::Bernstein => "bernstein",
        })
    }
}

impl FromStr for PolyBasis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "monomial" | "m" => Ok(PolyBasis::Monomial),
            "chebyshev" | "c" => Ok(PolyBasis::Chebyshev),
            "bernstein" | "b" => Ok(PolyBasis::Bernstein),
            other => Err(Error::input(format!("unknown polynomial basis `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SubspaceKind {
    Polynomial { order: usize, basis: PolyBasis },
    Structural,
}

/// One fixed, parameter-free block of regressors.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureSubspace {
    pub block: DenseMatrix,
    pub kind: SubspaceKind,
    pub normalized: bool,
}

impl FeatureSubspace {
    pub fn polynomial(block: DenseMatrix, order: usize, basis: PolyBasis) -> Self {
        FeatureSubspace {
            block,
            kind: SubspaceKind::Polynomial { order, basis },
            normalized: false,
        }
    }

    pub fn structural(block: DenseMatrix) -> Self {
        FeatureSubspace {
            block,
            kind: SubspaceKind::Structural,
            normalized: false,
        }
    }

    pub fn width(&self) -> usize {
        self.block.cols()
    }

    pub fn is_structural(&self) -> bool {
        self.kind == SubspaceKind::Structural
    }

    pub fn label(&self) -> String {
        match self.kind {
            SubspaceKind::Polynomial { order, .. } => format!("P{order}"),
            SubspaceKind::Structural => "S".to_string(),
        }
    }
}

/// Ordered polynomial blocks (ascending order) followed by at most one structural block.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureSpace {
    blocks: Vec<FeatureSubspace>,
    max_order: Option<usize>,
    n: usize,
}

impl FeatureSpace {
    pub fn blocks(&self) -> &[FeatureSubspace] {
        &self.blocks
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Largest polynomial order present, if any polynomial block is.
    pub fn max_order(&self) -> Option<usize> {
        self.max_order
    }

    /// Total width `D = Σ d_t`.
    pub fn width(&self) -> usize {
        self.blocks.iter().map(FeatureSubspace::width).sum()
    }

    pub fn widths(&self) -> Vec<usize> {
        self.blocks.iter().map(FeatureSubspace::width).collect()
    }

    pub fn polynomial_blocks(&self) -> impl Iterator<Item = &FeatureSubspace> {
        self.blocks.iter().filter(|b| !b.is_structural())
    }

    pub fn structural(&self) -> Option<&FeatureSubspace> {
        self.blocks.last().filter(|b| b.is_structural())
    }

    /// All blocks side by side, `n × D`.
    pub fn concatenated(&self) -> DenseMatrix {
        let refs: Vec<&DenseMatrix> = self.blocks.iter().map(|b| &b.block).collect();
        DenseMatrix::hcat(&refs).expect("blocks share n")
    }
}

/// Builds `Φ_0..Φ_K` for `basis`, with the Chebyshev recurrence applied to `L̂` as is.
pub fn build_poly_subspaces(
    lhat: &SparseSym,
    x: &DenseMatrix,
    order: usize,
    basis: PolyBasis,
) -> Result<Vec<FeatureSubspace>> {
    build_poly_subspaces_with(lhat, x, order, basis, false)
}

/// As [`build_poly_subspaces`]; `chebyshev_rescale` runs the Chebyshev
/// recurrence on `L̂ − I` (the usual `2L̂/λ_max − I` with `λ_max = 2`).
pub fn build_poly_subspaces_with(
    lhat: &SparseSym,
    x: &DenseMatrix,
    order: usize,
    basis: PolyBasis,
    chebyshev_rescale: bool,
) -> Result<Vec<FeatureSubspace>> {
    if lhat.n() != x.rows() {
        return Err(Error::contract(format!(
            "graph has {} nodes but features have {} rows",
            lhat.n(),
            x.rows()
        )));
    }
    let blocks = match basis {
        PolyBasis::Monomial => monomial_blocks(lhat, x, order)?,
        PolyBasis::Chebyshev if chebyshev_rescale => {
            // L̃ = L̂ − I, stored as a sparse matrix so the recurrence stays sparse.
            let shifted = shift_identity(lhat, -1.0);
            chebyshev_blocks(&shifted, x, order)?
        }
        PolyBasis::Chebyshev => chebyshev_blocks(lhat, x, order)?,
        PolyBasis::Bernstein => bernstein_blocks(lhat, x, order)?,
    };
    Ok(blocks
        .into_iter()
        .enumerate()
        .map(|(t, b)| FeatureSubspace::polynomial(b, t, basis))
        .collect())
}

fn check_finite(m: &DenseMatrix, t: usize) -> Result<()> {
    if m.is_finite() {
        Ok(())
    } else {
        Err(Error::numeric(format!("non-finite feature values at order {t}")))
    }
}

fn monomial_blocks(lhat: &SparseSym, x: &DenseMatrix, order: usize) -> Result<Vec<DenseMatrix>> {
    let mut out = vec![x.clone()];
    for t in 1..=order {
        let next = spmm(lhat, &out[t - 1])?;
        check_finite(&next, t)?;
        out.push(next);
    }
    Ok(out)
}

fn chebyshev_blocks(op: &SparseSym, x: &DenseMatrix, order: usize) -> Result<Vec<DenseMatrix>> {
    let mut out = vec![x.clone()];
    if order >= 1 {
        let first = spmm(op, x)?;
        check_finite(&first, 1)?;
        out.push(first);
    }
    for t in 2..=order {
        let mut next = spmm(op, &out[t - 1])?;
        next.scale(2.0);
        next.axpy(-1.0, &out[t - 2])?;
        check_finite(&next, t)?;
        out.push(next);
    }
    Ok(out)
}

fn bernstein_blocks(lhat: &SparseSym, x: &DenseMatrix, order: usize) -> Result<Vec<DenseMatrix>> {
    let powers = monomial_blocks(lhat, x, order)?;
    let scale = 0.5f64.powi(order as i32);
    powers
        .into_iter()
        .enumerate()
        .map(|(t, mut block)| {
            for _ in 0..order - t {
                // (2I − L̂)·block
                block = spmm_shift(lhat, &block, -1.0, 2.0)?;
            }
            block.scale(scale * binomial(order, t));
            check_finite(&block, t)?;
            Ok(block)
        })
        .collect()
}

/// `C(n, k)` as a float.
pub fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// `M + c·I` for a symmetric sparse matrix.
fn shift_identity(m: &SparseSym, c: f64) -> SparseSym {
    let n = m.n();
    let mut t = Vec::with_capacity(m.nnz() + n);
    for i in 0..n {
        let (cols, vals) = m.row(i);
        let mut diag = false;
        for (&j, &v) in cols.iter().zip(vals) {
            if i == j {
                diag = true;
                t.push((i, j, v + c));
            } else {
                t.push((i, j, v));
            }
        }
        if !diag {
            t.push((i, i, c));
        }
    }
    SparseSym::from_triplets(n, &t).expect("shifting the diagonal keeps symmetry")
}

/// Scales every column with norm above [`ZERO_COLUMN_EPS`] to unit L2 norm.
pub fn column_normalize(m: &DenseMatrix) -> DenseMatrix {
    let inv: Vec<f64> = m
        .column_norms()
        .into_iter()
        .map(|nrm| if nrm > ZERO_COLUMN_EPS { 1.0 / nrm } else { 1.0 })
        .collect();
    let mut out = m.clone();
    let cols = m.cols().max(1);
    out.as_mut_slice().par_chunks_mut(cols).for_each(|row| {
        for (v, s) in row.iter_mut().zip(&inv) {
            *v *= s;
        }
    });
    out
}

/// Orders the blocks into a [`FeatureSpace`], optionally column-normalizing each one.
pub fn assemble(
    poly: Vec<FeatureSubspace>,
    structural: Option<FeatureSubspace>,
    normalize: bool,
) -> Result<FeatureSpace> {
    let n = poly
        .first()
        .or(structural.as_ref())
        .map(|b| b.block.rows())
        .ok_or_else(|| Error::contract("feature space needs at least one block"))?;

    let mut last_order = None;
    for b in &poly {
        match b.kind {
            SubspaceKind::Polynomial { order, .. } => {
                if last_order.is_some_and(|o| order <= o) {
                    return Err(Error::contract("polynomial blocks must have ascending orders"));
                }
                last_order = Some(order);
            }
            SubspaceKind::Structural => {
                return Err(Error::contract("structural block passed as polynomial"));
            }
        }
    }
    if let Some(s) = &structural {
        if !s.is_structural() {
            return Err(Error::contract("structural slot holds a polynomial block"));
        }
    }

    let mut blocks: Vec<FeatureSubspace> = poly.into_iter().chain(structural).collect();
    if let Some(b) = blocks.iter().find(|b| b.block.rows() != n) {
        return Err(Error::contract(format!(
            "block {} has {} rows, expected {n}",
            b.label(),
            b.block.rows()
        )));
    }
    if normalize {
        for b in &mut blocks {
            b.block = column_normalize(&b.block);
            b.normalized = true;
        }
    }
    Ok(FeatureSpace {
        blocks,
        max_order: last_order,
        n,
    })
}
