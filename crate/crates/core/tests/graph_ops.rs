mod common;

use common::*;
use fegnn::dense::DenseMatrix;
use fegnn::graph::{build_adjacency, spectral_radius_estimate, spmm, EdgeList, SparseSym};
use fegnn_oracles as oracle;
use proptest::prelude::*;
use rand::Rng;

#[test]
fn normalized_adjacency_matches_dense_formula() {
    let mut r = rng(11);
    for _ in 0..10 {
        let n = r.random_range(2..25);
        let g = random_graph(n, 0.25, &mut r);
        let want = oracle::normalized_adjacency(n, &g.edges);
        assert!(to_mat(&g.ahat.to_dense()).max_abs_diff(&want) < 1e-14);
        let lhat = oracle::laplacian(&want);
        assert!(to_mat(&g.lhat.to_dense()).max_abs_diff(&lhat) < 1e-14);
    }
}

#[test]
fn adjacency_is_symmetric_with_unit_spectral_radius() {
    let mut r = rng(3);
    for _ in 0..10 {
        let g = random_graph(30, 0.2, &mut r);
        let d = g.ahat.to_dense();
        assert_eq!(d, d.transpose());
        assert!(d.as_slice().iter().all(|&v| (0.0..=1.0).contains(&v)));
        let (vals, _) = oracle::jacobi_eigen(&to_mat(&d));
        let radius = vals.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        assert!((radius - 1.0).abs() < 1e-10, "{radius}");
    }
}

#[test]
fn hub_row_sum_exceeds_one() {
    // Symmetric normalization bounds the spectrum, not the row sums.
    let g = graph(11, (1..11).map(|leaf| (0, leaf)).collect());
    let hub = g.ahat.row_sums()[0];
    assert!((hub - (1.0 / 11.0 + 10.0 / 22f64.sqrt())).abs() < 1e-12);
    assert!(hub > 2.0);
}

#[test]
fn laplacian_spectrum_within_zero_two() {
    let mut r = rng(5);
    for _ in 0..10 {
        let n = r.random_range(3..30);
        let g = random_graph(n, 0.3, &mut r);
        assert!(spectral_radius_estimate(&g.lhat, 100) <= 2.0 + 1e-9);
        let (vals, _) = oracle::jacobi_eigen(&to_mat(&g.lhat.to_dense()));
        assert!(vals.iter().all(|&v| (-1e-10..=2.0 + 1e-10).contains(&v)), "{vals:?}");
    }
}

#[test]
fn spmm_matches_dense_product() {
    let mut r = rng(8);
    let g = random_graph(8, 0.4, &mut r);
    let m = random_dense(8, 3, &mut r);
    let got = spmm(&g.ahat, &m).unwrap();
    let want = to_mat(&g.ahat.to_dense()).mul(&to_mat(&m));
    assert!(to_mat(&got).max_abs_diff(&want) < 1e-12);
}

#[test]
fn spmm_identity_and_zero() {
    let mut r = rng(1);
    let m = random_dense(6, 4, &mut r);
    assert_eq!(spmm(&SparseSym::identity(6), &m).unwrap(), m);
    assert_eq!(spmm(&SparseSym::zeros(6), &m).unwrap(), DenseMatrix::zeros(6, 4));
    assert!(spmm(&SparseSym::identity(5), &m).is_err());
}

#[test]
fn isolated_node_keeps_unit_self_loop() {
    let g = graph(3, vec![(0, 1)]);
    assert_eq!(g.ahat.get(2, 2), 1.0);
    assert_eq!(g.lhat.get(2, 2), 0.0);
}

#[test]
fn weighted_edges_use_weighted_degree() {
    let e = EdgeList::weighted(2, vec![(0, 1)], vec![3.0]).unwrap();
    let a = build_adjacency(&e).unwrap();
    let ahat = fegnn::graph::normalize_adjacency(&a).unwrap();
    assert!((ahat.get(0, 1) - 3.0 / 4.0).abs() < 1e-15);
    assert!((ahat.get(0, 0) - 1.0 / 4.0).abs() < 1e-15);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn spmm_is_bit_deterministic(seed in 0u64..1000, n in 1usize..60, cols in 1usize..6) {
        let mut r = rng(seed);
        let g = random_graph(n, 0.2, &mut r);
        let m = random_dense(n, cols, &mut r);
        let a = spmm(&g.lhat, &m).unwrap();
        let b = spmm(&g.lhat, &m).unwrap();
        prop_assert_eq!(a.as_slice(), b.as_slice());
    }

    #[test]
    fn canonical_edges_rebuild_the_same_adjacency(
        n in 2usize..20,
        raw in proptest::collection::vec((0usize..20, 0usize..20), 0..40),
    ) {
        let pairs: Vec<_> = raw.into_iter().map(|(u, v)| (u % n, v % n)).collect();
        let e = EdgeList::new(n, pairs).unwrap();
        let canon = e.canonicalize();
        prop_assert!(canon.is_canonical());
        prop_assert_eq!(canon.canonicalize(), canon.clone());
        prop_assert_eq!(build_adjacency(&e).unwrap(), build_adjacency(&canon).unwrap());
    }
}
