//! Structural principal components from a truncated SVD of a symmetric graph matrix.
//!
//! For a symmetric matrix the singular values are the absolute eigenvalues and
//! the left singular vectors are the eigenvectors, so everything here is an
//! eigen-solve ordered by `|λ|`. Small matrices (`n ≤ dense_threshold`) use a
//! full dense eigendecomposition; larger ones use seeded randomized subspace
//! iteration followed by Rayleigh–Ritz.

use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, SymmetricEigen};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::dense::DenseMatrix;
use crate::error::{Error, Result};
use crate::featurize::FeatureSubspace;
use crate::graph::{spmm, SparseSym};

/// How many components to keep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RankSpec {
    /// Exactly `z` components.
    Explicit(usize),
    /// The smallest rank whose cumulative singular-value mass reaches this fraction.
    MassRatio(f64),
}

impl RankSpec {
    pub fn validate(&self) -> Result<()> {
        match *self {
            RankSpec::Explicit(0) => Err(Error::input("SVD rank must be at least 1")),
            RankSpec::MassRatio(r) if !(r > 0.0 && r <= 1.0) => {
                Err(Error::input(format!("SVD mass ratio {r} outside (0, 1]")))
            }
            _ => Ok(()),
        }
    }
}

/// Which graph matrix the structural components are taken from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SvdTarget {
    #[default]
    Adjacency,
    Laplacian,
}

impl fmt::Display for SvdTarget {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SvdTarget::Adjacency => "adjacency",
            SvdTarget::Laplacian => "laplacian",
        })
    }
}

impl FromStr for SvdTarget {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "adjacency" | "ahat" => Ok(SvdTarget::Adjacency),
            "laplacian" | "lhat" => Ok(SvdTarget::Laplacian),
            other => Err(Error::input(format!("unknown SVD target `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SvdMethod {
    Dense,
    Randomized,
}

#[derive(Debug, Clone)]
pub struct SvdOptions {
    /// Matrices up to this size are decomposed densely.
    pub dense_threshold: usize,
    pub oversampling: usize,
    pub power_iterations: usize,
    /// Extra subspace sweeps allowed after the fixed power iterations.
    pub max_sweeps: usize,
    /// Eigen-residual tolerance, relative to the largest singular value.
    pub tolerance: f64,
}

impl Default for SvdOptions {
    fn default() -> Self {
        SvdOptions {
            dense_threshold: 512,
            oversampling: 10,
            power_iterations: 7,
            max_sweeps: 500,
            tolerance: 1e-6,
        }
    }
}

/// Top-`z` singular triplets of a symmetric matrix.
#[derive(Debug, Clone)]
pub struct SvdResult {
    /// `n × z`, orthonormal columns, each sign-canonicalized.
    pub vectors: DenseMatrix,
    /// Nonincreasing singular values `|λ_i|`.
    pub sigma: Vec<f64>,
    /// The signed eigenvalues behind `sigma`.
    pub eigenvalues: Vec<f64>,
    /// Sum of all `n` singular values, when it was computed.
    pub total_mass: Option<f64>,
    pub method: SvdMethod,
    /// Largest eigen-residual `‖M q_i − λ_i q_i‖` among the kept columns.
    pub residual: f64,
}

impl SvdResult {
    pub fn rank(&self) -> usize {
        self.sigma.len()
    }

    /// `Σ λ_i q_i q_iᵀ`, the best rank-`z` approximation.
    pub fn reconstruct(&self) -> DenseMatrix {
        let mut scaled = self.vectors.clone();
        let z = self.rank();
        for i in 0..scaled.rows() {
            let row = scaled.row_mut(i);
            for (v, l) in row.iter_mut().zip(&self.eigenvalues[..z]) {
                *v *= l;
            }
        }
        scaled.matmul_t(&self.vectors).expect("shapes agree")
    }
}

/// Truncated SVD with default options.
pub fn truncated_svd(m: &SparseSym, spec: RankSpec, seed: u64) -> Result<SvdResult> {
    truncated_svd_with(m, spec, seed, &SvdOptions::default())
}

pub fn truncated_svd_with(m: &SparseSym, spec: RankSpec, seed: u64, opts: &SvdOptions) -> Result<SvdResult> {
    spec.validate()?;
    let n = m.n();
    if n == 0 {
        return Err(Error::input("cannot decompose an empty matrix"));
    }
    if let RankSpec::Explicit(z) = spec {
        if z > n {
            return Err(Error::input(format!("SVD rank {z} exceeds matrix size {n}")));
        }
    }
    if n <= opts.dense_threshold {
        return dense_svd(m, spec);
    }
    let (z, total_mass) = match spec {
        RankSpec::Explicit(z) => (z, None),
        RankSpec::MassRatio(r) => {
            let sv = singular_values(m);
            (mass_ratio_rank(&sv, r), Some(sv.iter().sum()))
        }
    };
    let mut out = randomized_svd(m, z, seed, opts)?;
    out.total_mass = total_mass;
    Ok(out)
}

/// All singular values of a symmetric matrix, nonincreasing.
pub fn singular_values(m: &SparseSym) -> Vec<f64> {
    let dense = m.to_dense().to_nalgebra();
    let mut sv: Vec<f64> = dense.symmetric_eigenvalues().iter().map(|v| v.abs()).collect();
    sv.sort_by(|a, b| b.total_cmp(a));
    sv
}

/// Smallest `z` with `Σ_{i<z} σ_i ≥ ratio · Σ σ_i`, for nonincreasing `sigma`.
pub fn mass_ratio_rank(sigma: &[f64], ratio: f64) -> usize {
    let total: f64 = sigma.iter().sum();
    if total <= 0.0 {
        return sigma.len().min(1);
    }
    let goal = ratio * total;
    let mut acc = 0.0;
    for (i, s) in sigma.iter().enumerate() {
        acc += s;
        // Relative slack keeps ratio = 1.0 from missing the last term to rounding.
        if acc >= goal * (1.0 - 1e-12) {
            return i + 1;
        }
    }
    sigma.len()
}

/// Rounds a rank up to the next multiple of 100, capped at `n`.
pub fn round_rank_to_hundred(z: usize, n: usize) -> usize {
    (z.div_ceil(100) * 100).clamp(1, n.max(1))
}

/// Resolves a [`RankSpec`] to a concrete rank, optionally rounding mass-ratio ranks up to hundreds.
pub fn resolve_rank(m: &SparseSym, spec: RankSpec, round_to_hundred: bool) -> Result<usize> {
    spec.validate()?;
    match spec {
        RankSpec::Explicit(z) if z > m.n() => Err(Error::input(format!("SVD rank {z} exceeds matrix size {}", m.n()))),
        RankSpec::Explicit(z) => Ok(z),
        RankSpec::MassRatio(r) => {
            let z = mass_ratio_rank(&singular_values(m), r);
            Ok(if round_to_hundred {
                round_rank_to_hundred(z, m.n())
            } else {
                z
            })
        }
    }
}

/// Indices of `values` ordered by decreasing magnitude; positive first on ties.
fn magnitude_order(values: &[f64]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_by(|&a, &b| {
        values[b]
            .abs()
            .total_cmp(&values[a].abs())
            .then(values[b].total_cmp(&values[a]))
            .then(a.cmp(&b))
    });
    idx
}

fn dense_svd(m: &SparseSym, spec: RankSpec) -> Result<SvdResult> {
    let dense = m.to_dense().to_nalgebra();
    let eig = SymmetricEigen::new(dense);
    let order = magnitude_order(eig.eigenvalues.as_slice());
    let sigma_all: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i].abs()).collect();
    let total: f64 = sigma_all.iter().sum();
    let z = match spec {
        RankSpec::Explicit(z) => z,
        RankSpec::MassRatio(r) => mass_ratio_rank(&sigma_all, r),
    };
    let n = m.n();
    let mut vectors = DenseMatrix::from_fn(n, z, |i, j| eig.eigenvectors[(i, order[j])]);
    canonicalize_signs(&mut vectors);
    let eigenvalues: Vec<f64> = order[..z].iter().map(|&i| eig.eigenvalues[i]).collect();
    let residual = eigen_residual(m, &vectors, &eigenvalues)?;
    Ok(SvdResult {
        vectors,
        sigma: sigma_all[..z].to_vec(),
        eigenvalues,
        total_mass: Some(total),
        method: SvdMethod::Dense,
        residual,
    })
}

fn orthonormalize(y: &DenseMatrix) -> DenseMatrix {
    let q = y.to_nalgebra().qr().q();
    DenseMatrix::from_nalgebra(&q)
}

fn randomized_svd(m: &SparseSym, z: usize, seed: u64, opts: &SvdOptions) -> Result<SvdResult> {
    let n = m.n();
    let width = (z + opts.oversampling).min(n);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let omega = DenseMatrix::from_fn(n, width, |_, _| StandardNormal.sample(&mut rng));

    let mut basis = orthonormalize(&spmm(m, &omega)?);
    for _ in 0..opts.power_iterations {
        basis = orthonormalize(&spmm(m, &basis)?);
    }

    let scale_tol = |sigma_max: f64| opts.tolerance * sigma_max.max(f64::MIN_POSITIVE);
    let mut last_residual = f64::INFINITY;
    for _ in 0..=opts.max_sweeps {
        // Rayleigh–Ritz on the current basis.
        let projected = basis.t_matmul(&spmm(m, &basis)?)?;
        let small: DMatrix<f64> = {
            let p = projected.to_nalgebra();
            (&p + p.transpose()) * 0.5
        };
        let eig = SymmetricEigen::new(small);
        let order = magnitude_order(eig.eigenvalues.as_slice());
        let rotation = DenseMatrix::from_fn(width, width, |i, j| eig.eigenvectors[(i, order[j])]);
        let ritz = basis.matmul(&rotation)?;
        let values: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();

        let mut vectors = DenseMatrix::from_fn(n, z, |i, j| ritz.get(i, j));
        let residual = eigen_residual(m, &vectors, &values[..z])?;
        last_residual = residual;
        if residual <= scale_tol(values[0].abs()) {
            canonicalize_signs(&mut vectors);
            return Ok(SvdResult {
                vectors,
                sigma: values[..z].iter().map(|v| v.abs()).collect(),
                eigenvalues: values[..z].to_vec(),
                total_mass: None,
                method: SvdMethod::Randomized,
                residual,
            });
        }
        basis = orthonormalize(&spmm(m, &ritz)?);
    }
    Err(Error::Numeric {
        message: format!("subspace iteration did not converge for rank {z}"),
        residual: Some(last_residual),
    })
}

/// `max_i ‖M q_i − λ_i q_i‖`.
fn eigen_residual(m: &SparseSym, vectors: &DenseMatrix, values: &[f64]) -> Result<f64> {
    let mq = spmm(m, vectors)?;
    let mut sq = vec![0.0; vectors.cols()];
    for i in 0..vectors.rows() {
        for (j, s) in sq.iter_mut().enumerate() {
            let r = mq.get(i, j) - values[j] * vectors.get(i, j);
            *s += r * r;
        }
    }
    Ok(sq.into_iter().fold(0.0, |a, s| a.max(s.sqrt())))
}

/// Flips each column so its largest-magnitude entry (first on ties) is nonnegative.
pub fn canonicalize_signs(vectors: &mut DenseMatrix) {
    for j in 0..vectors.cols() {
        let mut best = 0.0f64;
        let mut sign = 1.0;
        for i in 0..vectors.rows() {
            let v = vectors.get(i, j);
            if v.abs() > best {
                best = v.abs();
                sign = v.signum();
            }
        }
        if sign < 0.0 {
            for i in 0..vectors.rows() {
                vectors.set(i, j, -vectors.get(i, j));
            }
        }
    }
}

/// `S = Q̃ · diag(σ)`: each singular vector scaled by its singular value.
pub fn structural_components(svd: &SvdResult) -> FeatureSubspace {
    let mut block = svd.vectors.clone();
    for i in 0..block.rows() {
        for (v, s) in block.row_mut(i).iter_mut().zip(&svd.sigma) {
            *v *= s;
        }
    }
    FeatureSubspace::structural(block)
}
