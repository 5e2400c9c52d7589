#![allow(dead_code)]

use fegnn::dense::DenseMatrix;
use fegnn::graph::{build_adjacency, laplacian, normalize_adjacency, EdgeList, SparseSym};
use fegnn_oracles::Mat;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn to_mat(m: &DenseMatrix) -> Mat {
    Mat::from_vec(m.rows(), m.cols(), m.as_slice().to_vec())
}

pub fn to_dense(m: &Mat) -> DenseMatrix {
    DenseMatrix::new(m.rows, m.cols, m.data.clone()).unwrap()
}

/// Erdős–Rényi edge list.
pub fn random_edges(n: usize, p: f64, rng: &mut ChaCha8Rng) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            if rng.random::<f64>() < p {
                out.push((i, j));
            }
        }
    }
    out
}

pub fn random_dense(rows: usize, cols: usize, rng: &mut ChaCha8Rng) -> DenseMatrix {
    DenseMatrix::from_fn(rows, cols, |_, _| rng.random_range(-1.0..1.0))
}

pub struct Graph {
    pub n: usize,
    pub edges: Vec<(usize, usize)>,
    pub ahat: SparseSym,
    pub lhat: SparseSym,
}

pub fn graph(n: usize, edges: Vec<(usize, usize)>) -> Graph {
    let a = build_adjacency(&EdgeList::new(n, edges.clone()).unwrap()).unwrap();
    let ahat = normalize_adjacency(&a).unwrap();
    let lhat = laplacian(&ahat);
    Graph { n, edges, ahat, lhat }
}

pub fn random_graph(n: usize, p: f64, rng: &mut ChaCha8Rng) -> Graph {
    let edges = random_edges(n, p, rng);
    graph(n, edges)
}

pub fn rel_frobenius(a: &Mat, b: &Mat) -> f64 {
    a.sub(b).frobenius() / b.frobenius().max(f64::MIN_POSITIVE)
}
