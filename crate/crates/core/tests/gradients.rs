mod common;

use common::*;
use fegnn::featurize::{assemble, build_poly_subspaces, FeatureSpace, PolyBasis};
use fegnn::model::{FeGnnParams, LossConfig, ModelParams, ParamSet, Weight, WsParams};
use fegnn::spectral::{structural_components, truncated_svd, RankSpec};
use fegnn_oracles as oracle;
use fegnn_oracles::Mat;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

fn weight_mat(w: &Weight) -> Mat {
    match w {
        Weight::Full(m) => to_mat(m),
        Weight::Factored { left, right } => to_mat(left).mul(&to_mat(right)),
    }
}

/// Objective recomputed from the raw parameter values with the oracle's dense ops.
fn oracle_objective(fs: &FeatureSpace, p: &ModelParams, y: &[usize], mask: &[bool], lambda: f64) -> f64 {
    let blocks: Vec<Mat> = fs.blocks().iter().map(|b| to_mat(&b.block)).collect();
    let h = match p {
        ModelParams::Flattened(f) => blocks
            .iter()
            .zip(&f.weights)
            .map(|(b, w)| b.mul(&weight_mat(w)))
            .reduce(|a, b| a.add(&b))
            .unwrap(),
        ModelParams::Shared(s) => {
            let w = weight_mat(&s.shared);
            let mut h = Mat::zeros(fs.n(), w.cols);
            for (b, g) in blocks.iter().zip(&s.gamma) {
                h = h.add(&b.mul(&w).scale(*g));
            }
            if let (Some(ws), Some(sb)) = (&s.structural, fs.structural()) {
                h = h.add(&to_mat(&sb.block).mul(&weight_mat(ws)));
            }
            h
        }
    };
    let penalty: f64 = p.tensors().iter().flat_map(|t| t.iter()).map(|v| v * v).sum();
    oracle::cross_entropy(&h, y, mask) + lambda * penalty
}

fn flatten(p: &ModelParams) -> Vec<f64> {
    p.tensors().iter().flat_map(|t| t.iter().copied()).collect()
}

fn unflatten(p: &mut ModelParams, x: &[f64]) {
    let mut i = 0;
    for t in p.tensors_mut() {
        t.copy_from_slice(&x[i..i + t.len()]);
        i += t.len();
    }
}

fn instance(r: &mut ChaCha8Rng, with_s: bool) -> (FeatureSpace, Vec<usize>, Vec<bool>) {
    let (n, d, c) = (12, 5, 3);
    let g = random_graph(n, 0.3, r);
    let x = random_dense(n, d, r);
    let poly = build_poly_subspaces(&g.lhat, &x, 2, PolyBasis::Chebyshev).unwrap();
    let s = with_s.then(|| structural_components(&truncated_svd(&g.ahat, RankSpec::Explicit(4), 0).unwrap()));
    let fs = assemble(poly, s, true).unwrap();
    let y: Vec<usize> = (0..n).map(|_| r.random_range(0..c)).collect();
    let mut mask: Vec<bool> = (0..n).map(|_| r.random::<f64>() < 0.6).collect();
    mask[0] = true;
    (fs, y, mask)
}

fn max_relative_error(fs: &FeatureSpace, p: &ModelParams, y: &[usize], mask: &[bool], lambda: f64) -> f64 {
    let cfg = LossConfig::new(lambda, mask.to_vec());
    let (value, grads) = p.gradients(fs, y, &cfg).unwrap();
    assert!((value - oracle_objective(fs, p, y, mask, lambda)).abs() < 1e-12);
    let x0 = flatten(p);
    let numeric = oracle::central_gradient(
        |x| {
            let mut q = p.clone();
            unflatten(&mut q, x);
            oracle_objective(fs, &q, y, mask, lambda)
        },
        &x0,
        1e-5,
    );
    flatten(&grads)
        .iter()
        .zip(&numeric)
        .map(|(a, b)| (a - b).abs() / a.abs().max(b.abs()).max(1e-6))
        .fold(0.0, f64::max)
}

#[test]
fn flattened_gradients_match_finite_differences() {
    let mut r = rng(31);
    for i in 0..10 {
        let (fs, y, mask) = instance(&mut r, i % 2 == 0);
        for lambda in [0.0, 0.01] {
            let p = ModelParams::Flattened(FeGnnParams::init(&fs, 3, None, &mut r));
            let err = max_relative_error(&fs, &p, &y, &mask, lambda);
            assert!(err <= 1e-4, "instance {i}, λ={lambda}: {err}");
        }
    }
}

#[test]
fn shared_gradients_match_finite_differences() {
    let mut r = rng(32);
    for i in 0..10 {
        let (fs, y, mask) = instance(&mut r, i % 2 == 1);
        for lambda in [0.0, 0.01] {
            let mut ws = WsParams::init(&fs, 3, None, &mut r).unwrap();
            ws.gamma.iter_mut().for_each(|g| *g = r.random_range(-1.5..1.5));
            let err = max_relative_error(&fs, &ModelParams::Shared(ws), &y, &mask, lambda);
            assert!(err <= 1e-4, "instance {i}, λ={lambda}: {err}");
        }
    }
}

#[test]
fn factored_gradients_match_finite_differences() {
    let mut r = rng(33);
    for i in 0..6 {
        let (fs, y, mask) = instance(&mut r, true);
        let p = if i % 2 == 0 {
            ModelParams::Flattened(FeGnnParams::init(&fs, 3, Some(4), &mut r))
        } else {
            ModelParams::Shared(WsParams::init(&fs, 3, Some(4), &mut r).unwrap())
        };
        let err = max_relative_error(&fs, &p, &y, &mask, 0.01);
        assert!(err <= 1e-4, "instance {i}: {err}");
    }
}

#[test]
fn shared_model_equals_its_flattened_expansion() {
    let mut r = rng(34);
    let (fs, _, _) = instance(&mut r, true);
    let mut ws = WsParams::init(&fs, 3, None, &mut r).unwrap();
    ws.gamma = vec![0.5, -1.0, 2.0];
    let a = ModelParams::Shared(ws.clone()).forward(&fs).unwrap();
    let b = ModelParams::Flattened(ws.to_flattened()).forward(&fs).unwrap();
    assert!(a.max_abs_diff(&b) < 1e-12);
}
