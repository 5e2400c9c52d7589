//! Feature-space diagnostics: mutual coherence between subspaces, column-norm
//! dispersion, edge homophily, dataset statistics, least-squares residuals,
//! and numeric checks of the linearized GCN forms.

use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::dense::DenseMatrix;
use crate::error::{Error, Result};
use crate::featurize::{binomial, ZERO_COLUMN_EPS};
use crate::graph::{spmm, EdgeList, SparseSym};

/// Copy of `m` with unit columns, and which columns were nonzero.
fn unit_columns(m: &DenseMatrix) -> (DenseMatrix, Vec<bool>) {
    let norms = m.column_norms();
    let keep: Vec<bool> = norms.iter().map(|&v| v > ZERO_COLUMN_EPS).collect();
    let out = DenseMatrix::from_fn(
        m.rows(),
        m.cols(),
        |i, j| {
            if keep[j] {
                m.get(i, j) / norms[j]
            } else {
                0.0
            }
        },
    );
    (out, keep)
}

/// `|cos|` between every column of `m0` (rows) and of `m1` (columns);
/// entries for zero columns are meaningless and must be masked by the caller.
fn abs_cosines(m0: &DenseMatrix, m1: &DenseMatrix) -> Result<(DenseMatrix, Vec<bool>, Vec<bool>)> {
    if m0.rows() != m1.rows() {
        return Err(Error::input(format!(
            "coherence needs equal row counts, got {} and {}",
            m0.rows(),
            m1.rows()
        )));
    }
    let (u0, k0) = unit_columns(m0);
    let (u1, k1) = unit_columns(m1);
    let mut c = u0.t_matmul(&u1)?;
    c.as_mut_slice().iter_mut().for_each(|v| *v = v.abs());
    Ok((c, k0, k1))
}

/// `μ(M0, M1)`: the largest `|cos|` between a column of `M0` and a column of
/// `M1`. Zero columns are skipped.
pub fn mutual_coherence(m0: &DenseMatrix, m1: &DenseMatrix) -> Result<f64> {
    let (c, k0, k1) = abs_cosines(m0, m1)?;
    if !k0.contains(&true) || !k1.contains(&true) {
        return Err(Error::input("coherence of an all-zero matrix is undefined"));
    }
    let mut best = 0.0f64;
    for (i, _) in k0.iter().enumerate().filter(|(_, &k)| k) {
        for (j, _) in k1.iter().enumerate().filter(|(_, &k)| k) {
            best = best.max(c.get(i, j));
        }
    }
    Ok(best)
}

/// Coherence values of one order `k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrderProfile {
    pub k: usize,
    /// `E^k_i` per column of `L̂ᵏX`; `None` where that column is zero.
    pub values: Vec<Option<f64>>,
    pub min: Option<f64>,
    pub median: Option<f64>,
    pub max: Option<f64>,
}

impl OrderProfile {
    fn new(k: usize, values: Vec<Option<f64>>) -> Self {
        let mut present: Vec<f64> = values.iter().flatten().copied().collect();
        present.sort_by(f64::total_cmp);
        let median = match present.len() {
            0 => None,
            len if len % 2 == 1 => Some(present[len / 2]),
            len => Some(0.5 * (present[len / 2 - 1] + present[len / 2])),
        };
        OrderProfile {
            k,
            min: present.first().copied(),
            max: present.last().copied(),
            median,
            values,
        }
    }

    pub fn present(&self) -> usize {
        self.values.iter().flatten().count()
    }
}

/// `E^k_i = max_{j<k} μ(L̂ʲX, (L̂ᵏX)_{·i})` for `k = 1..K`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoherenceProfile {
    pub orders: Vec<OrderProfile>,
}

impl CoherenceProfile {
    /// Header `k,i,E`, then one row per present value.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("k,i,E\n");
        for o in &self.orders {
            for (i, v) in o.values.iter().enumerate() {
                if let Some(v) = v {
                    let _ = writeln!(out, "{},{i},{v}", o.k);
                }
            }
        }
        out
    }

    pub fn medians(&self) -> Vec<Option<f64>> {
        self.orders.iter().map(|o| o.median).collect()
    }
}

pub fn correlation_profile(lhat: &SparseSym, x: &DenseMatrix, order: usize) -> Result<CoherenceProfile> {
    if order == 0 {
        return Err(Error::input("coherence profile needs K >= 1"));
    }
    if lhat.n() != x.rows() {
        return Err(Error::input(format!(
            "graph has {} nodes, features {} rows",
            lhat.n(),
            x.rows()
        )));
    }
    let mut powers = vec![x.clone()];
    for k in 1..=order {
        let next = spmm(lhat, &powers[k - 1])?;
        powers.push(next);
    }
    let mut orders = Vec::with_capacity(order);
    for k in 1..=order {
        let mut best: Vec<Option<f64>> = vec![None; x.cols()];
        let mut target_keep = vec![false; x.cols()];
        for j in 0..k {
            let (c, kj, kk) = abs_cosines(&powers[j], &powers[k])?;
            target_keep = kk;
            for (i, b) in best.iter_mut().enumerate() {
                for r in (0..c.rows()).filter(|&r| kj[r]) {
                    let v = c.get(r, i);
                    *b = Some(b.map_or(v, |cur| cur.max(v)));
                }
            }
        }
        let values = best
            .into_iter()
            .zip(&target_keep)
            .map(|(v, &keep)| if keep { v } else { None })
            .collect();
        orders.push(OrderProfile::new(k, values));
    }
    Ok(CoherenceProfile { orders })
}

/// Population standard deviation of the L2 norms of every column across `blocks`.
pub fn column_norm_std(blocks: &[&DenseMatrix]) -> Result<f64> {
    let norms: Vec<f64> = blocks.iter().flat_map(|b| b.column_norms()).collect();
    if norms.is_empty() {
        return Err(Error::input("no columns to measure"));
    }
    let len = norms.len() as f64;
    let mean = norms.iter().sum::<f64>() / len;
    Ok((norms.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / len).sqrt())
}

/// Fraction of edges whose endpoints share a label.
pub fn homophily_ratio(edges: &EdgeList, y: &[usize]) -> Result<f64> {
    if y.len() != edges.n() {
        return Err(Error::input(format!("{} labels for {} nodes", y.len(), edges.n())));
    }
    let canon = edges.canonicalize();
    if canon.is_empty() {
        return Err(Error::input("homophily is undefined without edges"));
    }
    let same = canon.pairs().iter().filter(|&&(u, v)| y[u] == y[v]).count();
    Ok(same as f64 / canon.len() as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetStats {
    pub name: String,
    pub nodes: usize,
    pub edges: usize,
    pub features: usize,
    pub classes: usize,
    /// `None` for graphs without edges.
    pub homophily: Option<f64>,
}

pub fn dataset_stats(ds: &Dataset) -> DatasetStats {
    DatasetStats {
        name: ds.name.clone(),
        nodes: ds.n(),
        edges: ds.edges.len(),
        features: ds.feature_dim(),
        classes: ds.classes,
        homophily: homophily_ratio(&ds.edges, &ds.labels).ok(),
    }
}

/// Bernstein blocks evaluated through their expansion in powers of `L̂`:
/// `P_k = 2^{−K} C(K,k) Σ_i 2^i (−1)^{K−k−i} C(K−k,i) L̂^{K−i}`.
pub fn bernstein_monomial_expansion(lhat: &SparseSym, x: &DenseMatrix, order: usize) -> Result<Vec<DenseMatrix>> {
    let mut powers = vec![x.clone()];
    for t in 1..=order {
        let next = spmm(lhat, &powers[t - 1])?;
        powers.push(next);
    }
    let scale = 0.5f64.powi(order as i32);
    Ok((0..=order)
        .map(|k| {
            let mut block = DenseMatrix::zeros(x.rows(), x.cols());
            for i in 0..=order - k {
                let sign = if (order - k - i).is_multiple_of(2) { 1.0 } else { -1.0 };
                let coef = scale * binomial(order, k) * 2f64.powi(i as i32) * sign * binomial(order - k, i);
                block.axpy(coef, &powers[order - i]).expect("same shape");
            }
            block
        })
        .collect())
}

/// `min_W ‖ΦW − B‖_F`, via an SVD-based least-squares solve.
pub fn least_squares_residual(phi: &DenseMatrix, target: &DenseMatrix) -> Result<f64> {
    if phi.rows() != target.rows() {
        return Err(Error::input("regressors and targets need equal row counts"));
    }
    let a = phi.to_nalgebra();
    let b = target.to_nalgebra();
    let svd = a.clone().svd(true, true);
    let tol = svd.singular_values.max() * 1e-12 * phi.rows().max(phi.cols()) as f64;
    let w = svd.solve(&b, tol).map_err(|e| Error::numeric(e.to_string()))?;
    Ok((&a * w - b).norm())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LinearVariant {
    /// `H ← Â H W`
    Gcn,
    /// `H ← α H⁽⁰⁾ W₀ + Â H W₁`
    SkipGcn,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinearizationCheck {
    /// Largest elementwise difference between the recursive and explicit forms.
    pub max_abs: f64,
    /// `max_abs` divided by the largest entry of the recursive output.
    pub normalized: f64,
}

fn random_weight(rows: usize, cols: usize, rng: &mut ChaCha8Rng) -> DenseMatrix {
    let s = 1.0 / (rows as f64).sqrt();
    DenseMatrix::from_fn(rows, cols, |_, _| rng.random_range(-s..s))
}

/// Compares `K` activation-free layers applied recursively against the
/// explicit sum-of-subspaces form, with weights (and skip coefficients in
/// `(0, 1)`) drawn from `seed`. Hidden widths equal the input width.
pub fn verify_linearization(
    variant: LinearVariant,
    ahat: &SparseSym,
    x: &DenseMatrix,
    order: usize,
    seed: u64,
) -> Result<LinearizationCheck> {
    if ahat.n() != x.rows() {
        return Err(Error::input("graph and features disagree on n"));
    }
    let d = x.cols();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let w1: Vec<DenseMatrix> = (0..order).map(|_| random_weight(d, d, &mut rng)).collect();
    let (w0, alpha): (Vec<DenseMatrix>, Vec<f64>) = match variant {
        LinearVariant::Gcn => (Vec::new(), Vec::new()),
        LinearVariant::SkipGcn => (0..order)
            .map(|_| (random_weight(d, d, &mut rng), rng.random_range(0.0..1.0)))
            .unzip(),
    };

    let mut recursive = x.clone();
    for k in 0..order {
        let mut next = spmm(ahat, &recursive)?.matmul(&w1[k])?;
        if variant == LinearVariant::SkipGcn {
            next.axpy(alpha[k], &x.matmul(&w0[k])?)?;
        }
        recursive = next;
    }

    // Â^i X for i = 0..K.
    let mut powers = vec![x.clone()];
    for i in 1..=order {
        let next = spmm(ahat, &powers[i - 1])?;
        powers.push(next);
    }
    let chain = |from: usize| -> Result<DenseMatrix> {
        let mut p = DenseMatrix::identity(d);
        for w in &w1[from..order] {
            p = p.matmul(w)?;
        }
        Ok(p)
    };
    let mut explicit = powers[order].matmul(&chain(0)?)?;
    if variant == LinearVariant::SkipGcn {
        for i in 0..order {
            let layer = order - 1 - i;
            let theta = w0[layer].matmul(&chain(order - i)?)?.scaled(alpha[layer]);
            explicit.axpy(1.0, &powers[i].matmul(&theta)?)?;
        }
    }

    let max_abs = recursive.max_abs_diff(&explicit);
    let scale = recursive.max_abs();
    Ok(LinearizationCheck {
        max_abs,
        normalized: if scale > 0.0 { max_abs / scale } else { max_abs },
    })
}
