mod common;

use common::*;
use fegnn::dense::DenseMatrix;
use fegnn::graph::SparseSym;
use fegnn::spectral::{
    resolve_rank, structural_components, truncated_svd, truncated_svd_with, RankSpec, SvdMethod, SvdOptions,
};
use fegnn_oracles as oracle;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// Random sparse symmetric matrix with entries in (−1, 1).
fn random_symmetric(n: usize, density: f64, r: &mut ChaCha8Rng) -> SparseSym {
    let mut t = Vec::new();
    for i in 0..n {
        for j in i..n {
            if r.random::<f64>() < density {
                let v = r.random_range(-1.0..1.0);
                t.push((i, j, v));
                if i != j {
                    t.push((j, i, v));
                }
            }
        }
    }
    SparseSym::from_triplets(n, &t).unwrap()
}

fn check_against_oracle(m: &SparseSym, z: usize, opts: &SvdOptions, seed: u64) {
    let dense = to_mat(&m.to_dense());
    let want = oracle::symmetric_singular_values(&dense);
    let svd = truncated_svd_with(m, RankSpec::Explicit(z), seed, opts).unwrap();
    for (got, exp) in svd.sigma.iter().zip(&want) {
        assert!((got - exp).abs() <= 1e-6 * exp.max(1e-12), "{got} vs {exp}");
    }
    // Eckart–Young: the rank-z residual is the root-sum-square of the discarded values.
    let tail = want[z..].iter().map(|s| s * s).sum::<f64>().sqrt();
    let residual = dense.sub(&to_mat(&svd.reconstruct())).frobenius();
    assert!(
        (residual - tail).abs() <= 1e-6 * dense.frobenius(),
        "{residual} vs {tail}"
    );
    let gram = svd.vectors.t_matmul(&svd.vectors).unwrap();
    assert!(gram.max_abs_diff(&DenseMatrix::identity(z)) < 1e-8);
}

#[test]
fn dense_path_matches_jacobi_oracle() {
    let mut r = rng(100);
    for _ in 0..10 {
        let n = r.random_range(5..=100);
        let m = random_symmetric(n, 0.2, &mut r);
        let z = r.random_range(1..=n.min(15));
        check_against_oracle(&m, z, &SvdOptions::default(), 0);
    }
}

#[test]
fn randomized_path_matches_jacobi_oracle() {
    let forced = SvdOptions {
        dense_threshold: 0,
        ..SvdOptions::default()
    };
    let mut r = rng(200);
    for seed in 0..10 {
        let n = r.random_range(30..=100);
        let g = random_graph(n, 0.15, &mut r);
        check_against_oracle(&g.ahat, 8, &forced, seed);
    }
}

#[test]
fn large_graph_uses_randomized_path() {
    let mut r = rng(7);
    let g = random_graph(600, 0.01, &mut r);
    let svd = truncated_svd(&g.ahat, RankSpec::Explicit(10), 1).unwrap();
    assert_eq!(svd.method, SvdMethod::Randomized);
    assert!(svd.residual <= 1e-6 * svd.sigma[0]);
    let dense = SvdOptions {
        dense_threshold: 10_000,
        ..SvdOptions::default()
    };
    let exact = truncated_svd_with(&g.ahat, RankSpec::Explicit(10), 1, &dense).unwrap();
    for (a, b) in svd.sigma.iter().zip(&exact.sigma) {
        assert!((a - b).abs() <= 1e-6 * b);
    }
}

#[test]
fn same_seed_same_vectors() {
    let mut r = rng(3);
    let g = random_graph(80, 0.1, &mut r);
    let forced = SvdOptions {
        dense_threshold: 0,
        ..SvdOptions::default()
    };
    let a = truncated_svd_with(&g.ahat, RankSpec::Explicit(6), 9, &forced).unwrap();
    let b = truncated_svd_with(&g.ahat, RankSpec::Explicit(6), 9, &forced).unwrap();
    assert_eq!(a.vectors, b.vectors);
}

#[test]
fn signs_are_canonical() {
    let mut r = rng(12);
    let g = random_graph(40, 0.2, &mut r);
    let svd = truncated_svd(&g.ahat, RankSpec::Explicit(5), 0).unwrap();
    for j in 0..5 {
        let col = svd.vectors.column(j);
        let big = col
            .iter()
            .cloned()
            .fold(0.0f64, |a, v| if v.abs() > a.abs() { v } else { a });
        assert!(big >= 0.0);
    }
}

#[test]
fn structural_block_scales_by_sigma() {
    let mut r = rng(5);
    let g = random_graph(30, 0.2, &mut r);
    let svd = truncated_svd(&g.ahat, RankSpec::Explicit(4), 0).unwrap();
    let s = structural_components(&svd);
    assert!(s.is_structural());
    for (j, norm) in s.block.column_norms().into_iter().enumerate() {
        assert!((norm - svd.sigma[j]).abs() < 1e-12);
    }
}

#[test]
fn mass_ratio_one_keeps_full_rank_after_rounding() {
    let g = random_graph(20, 0.3, &mut rng(1));
    assert_eq!(resolve_rank(&g.ahat, RankSpec::MassRatio(1.0), true).unwrap(), 20);
    let z = resolve_rank(&g.ahat, RankSpec::MassRatio(0.5), false).unwrap();
    let sv = oracle::symmetric_singular_values(&to_mat(&g.ahat.to_dense()));
    let total: f64 = sv.iter().sum();
    let kept: f64 = sv[..z].iter().sum();
    let short: f64 = sv[..z - 1].iter().sum();
    assert!(kept >= 0.5 * total && short < 0.5 * total);
}
