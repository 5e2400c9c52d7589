mod common;

use common::*;
use fegnn::data::{gen_sbm, load_dataset, random_split, save_dataset, Dataset, FeatureMode, SbmSpec};
use fegnn::dense::DenseMatrix;
use fegnn::diagnostics::homophily_ratio;
use fegnn::featurize::{assemble, build_poly_subspaces, PolyBasis};
use fegnn::graph::{build_adjacency, laplacian, normalize_adjacency, EdgeList};
use fegnn::optimize::{train, TrainConfig};
use proptest::prelude::*;

fn sbm(blocks: Vec<usize>, p_in: f64, p_out: f64, features: FeatureMode, seed: u64) -> Dataset {
    gen_sbm(&SbmSpec {
        block_sizes: blocks,
        p_in,
        p_out,
        features,
        seed,
    })
    .unwrap()
}

#[test]
fn large_sbm_round_trips() {
    let ds = sbm(
        vec![250; 4],
        0.02,
        0.002,
        FeatureMode::Informative { dim: 6, signal: 2.0 },
        5,
    );
    let dir = tempfile::tempdir().unwrap();
    save_dataset(&ds, dir.path()).unwrap();
    let mut back = load_dataset(dir.path()).unwrap();
    back.name = ds.name.clone();
    assert_eq!(back, ds);
}

#[test]
fn empty_edge_dataset_round_trips() {
    let x = DenseMatrix::from_rows(&[vec![-0.1, 1e-300], vec![2.5e10, -7.0]]).unwrap();
    let ds = Dataset::new("iso", x, vec![0, 1], EdgeList::new(2, vec![]).unwrap()).unwrap();
    let dir = tempfile::tempdir().unwrap();
    save_dataset(&ds, dir.path()).unwrap();
    let mut back = load_dataset(dir.path()).unwrap();
    back.name = ds.name.clone();
    assert_eq!(back, ds);
}

#[test]
fn sbm_edge_count_near_binomial_mean() {
    let ds = sbm(vec![100; 4], 0.1, 0.01, FeatureMode::Noise { dim: 2 }, 11);
    let intra: f64 = 4.0 * (100.0 * 99.0 / 2.0);
    let inter = 6.0 * 100.0 * 100.0;
    let mean = intra * 0.1 + inter * 0.01;
    let sd = (intra * 0.1 * 0.9 + inter * 0.01 * 0.99).sqrt();
    let m = ds.edges.pairs().len() as f64;
    assert!((m - mean).abs() <= 4.0 * sd, "{m} vs {mean} ± {sd}");
}

#[test]
fn sbm_extreme_probabilities_fix_homophily() {
    let ds = sbm(vec![3, 3], 1.0, 0.0, FeatureMode::Noise { dim: 1 }, 0);
    assert_eq!(ds.edges.pairs().len(), 6);
    assert_eq!(homophily_ratio(&ds.edges, &ds.labels).unwrap(), 1.0);
    let ds = sbm(vec![3, 3], 0.0, 1.0, FeatureMode::Noise { dim: 1 }, 0);
    assert_eq!(ds.edges.pairs().len(), 9);
    assert_eq!(homophily_ratio(&ds.edges, &ds.labels).unwrap(), 0.0);
}

/// Train and test accuracy of a linear model on `X` alone.
fn feature_only_accuracy(ds: &Dataset) -> (f64, f64) {
    let ahat = normalize_adjacency(&build_adjacency(&ds.edges).unwrap()).unwrap();
    let poly = build_poly_subspaces(&laplacian(&ahat), &ds.features, 0, PolyBasis::Monomial).unwrap();
    let fs = assemble(poly, None, false).unwrap();
    let split = random_split(ds.n(), (0.6, 0.2, 0.2), 0).unwrap();
    let cfg = TrainConfig {
        max_epochs: 300,
        lr: 0.05,
        ..TrainConfig::default()
    };
    let (params, report) = train(&fs, &ds.labels, &split, &cfg).unwrap();
    let train_acc = fegnn::optimize::evaluate(&params, &fs, &ds.labels, &split.train).unwrap();
    (train_acc, report.test_acc.unwrap())
}

#[test]
fn informative_features_separate_classes() {
    let ds = sbm(
        vec![100; 4],
        0.05,
        0.05,
        FeatureMode::Informative { dim: 8, signal: 5.0 },
        1,
    );
    let (train_acc, _) = feature_only_accuracy(&ds);
    assert!(train_acc >= 0.95, "{train_acc}");
}

#[test]
fn noise_features_carry_no_label_signal() {
    let ds = sbm(vec![100; 4], 0.05, 0.05, FeatureMode::Noise { dim: 8 }, 1);
    let (_, test_acc) = feature_only_accuracy(&ds);
    assert!(test_acc <= 0.35, "{test_acc}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn save_then_load_is_identity(
        seed in 0u64..1000,
        n in 2usize..30,
        d in 1usize..5,
        raw in proptest::collection::vec((0usize..30, 0usize..30), 0..60),
    ) {
        let mut r = rng(seed);
        let x = random_dense(n, d, &mut r).scaled(1e3);
        let labels: Vec<usize> = (0..n).map(|i| i % 2).collect();
        let pairs = raw.into_iter().map(|(u, v)| (u % n, v % n)).collect();
        let ds = Dataset::new("p", x, labels, EdgeList::new(n, pairs).unwrap()).unwrap();
        let dir = tempfile::tempdir().unwrap();
        save_dataset(&ds, dir.path()).unwrap();
        let mut back = load_dataset(dir.path()).unwrap();
        back.name = ds.name.clone();
        prop_assert_eq!(back, ds);
    }

    #[test]
    fn splits_partition_the_nodes(n in 3usize..500, seed in 0u64..1000) {
        let s = random_split(n, (0.6, 0.2, 0.2), seed).unwrap();
        prop_assert!(s.validate(n).is_ok());
        for i in 0..n {
            let hits = [s.train[i], s.val[i], s.test[i]].iter().filter(|&&b| b).count();
            prop_assert_eq!(hits, 1);
        }
        let (tr, va, _) = s.sizes();
        prop_assert_eq!(tr, (0.6 * n as f64 + 1e-9).floor() as usize);
        prop_assert_eq!(va, (0.2 * n as f64 + 1e-9).floor() as usize);
        prop_assert_eq!(random_split(n, (0.6, 0.2, 0.2), seed).unwrap(), s);
    }
}

#[test]
fn split_examples() {
    assert_eq!(random_split(10, (0.6, 0.2, 0.2), 3).unwrap().sizes(), (6, 2, 2));
    assert!(random_split(2, (0.6, 0.2, 0.2), 0).is_err());
    assert!(random_split(10, (0.6, 0.3, 0.2), 0).is_err());
}
