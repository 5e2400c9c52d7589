//! Reference computations for tests. Everything here is written directly from
//! the defining formulas with plain loops, shares no code with `fegnn`, and is
//! only meant for small inputs.

/// Row-major dense matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Mat {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<f64>,
}

impl Mat {
    pub fn zeros(rows: usize, cols: usize) -> Mat {
        Mat {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Mat {
        let mut m = Mat::zeros(n, n);
        for i in 0..n {
            m.set(i, i, 1.0);
        }
        m
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<f64>) -> Mat {
        assert_eq!(data.len(), rows * cols);
        Mat { rows, cols, data }
    }

    pub fn from_fn(rows: usize, cols: usize, f: impl Fn(usize, usize) -> f64) -> Mat {
        let mut m = Mat::zeros(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                m.set(i, j, f(i, j));
            }
        }
        m
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.cols + j] = v;
    }

    pub fn mul(&self, o: &Mat) -> Mat {
        assert_eq!(self.cols, o.rows);
        let mut out = Mat::zeros(self.rows, o.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                for j in 0..o.cols {
                    out.data[i * o.cols + j] += a * o.get(k, j);
                }
            }
        }
        out
    }

    pub fn transpose(&self) -> Mat {
        Mat::from_fn(self.cols, self.rows, |i, j| self.get(j, i))
    }

    pub fn add(&self, o: &Mat) -> Mat {
        self.lin(1.0, o, 1.0)
    }

    pub fn sub(&self, o: &Mat) -> Mat {
        self.lin(1.0, o, -1.0)
    }

    /// `a·self + b·o`
    pub fn lin(&self, a: f64, o: &Mat, b: f64) -> Mat {
        assert_eq!((self.rows, self.cols), (o.rows, o.cols));
        Mat::from_vec(
            self.rows,
            self.cols,
            self.data.iter().zip(&o.data).map(|(x, y)| a * x + b * y).collect(),
        )
    }

    pub fn scale(&self, s: f64) -> Mat {
        Mat::from_vec(self.rows, self.cols, self.data.iter().map(|v| v * s).collect())
    }

    pub fn frobenius(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn max_abs_diff(&self, o: &Mat) -> f64 {
        assert_eq!((self.rows, self.cols), (o.rows, o.cols));
        self.data
            .iter()
            .zip(&o.data)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self.get(i, j)).collect()
    }

    pub fn hcat(blocks: &[Mat]) -> Mat {
        let rows = blocks[0].rows;
        let cols = blocks.iter().map(|b| b.cols).sum();
        let mut out = Mat::zeros(rows, cols);
        let mut off = 0;
        for b in blocks {
            assert_eq!(b.rows, rows);
            for i in 0..rows {
                for j in 0..b.cols {
                    out.set(i, off + j, b.get(i, j));
                }
            }
            off += b.cols;
        }
        out
    }
}

/// `(D+I)^{-1/2}(A+I)(D+I)^{-1/2}` from an undirected, unweighted edge list.
pub fn normalized_adjacency(n: usize, edges: &[(usize, usize)]) -> Mat {
    let mut a = Mat::identity(n);
    for &(u, v) in edges {
        if u != v {
            a.set(u, v, 1.0);
            a.set(v, u, 1.0);
        }
    }
    let deg: Vec<f64> = (0..n).map(|i| (0..n).map(|j| a.get(i, j)).sum()).collect();
    Mat::from_fn(n, n, |i, j| a.get(i, j) / (deg[i] * deg[j]).sqrt())
}

pub fn laplacian(ahat: &Mat) -> Mat {
    Mat::identity(ahat.rows).sub(ahat)
}

fn mat_pow(m: &Mat, p: usize) -> Mat {
    (0..p).fold(Mat::identity(m.rows), |acc, _| acc.mul(m))
}

pub fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// `L^t X` for `t = 0..=K`, each power formed as a dense matrix first.
pub fn monomial_blocks(l: &Mat, x: &Mat, k: usize) -> Vec<Mat> {
    (0..=k).map(|t| mat_pow(l, t).mul(x)).collect()
}

/// `T_t(L) X` with the Chebyshev matrix polynomials built densely.
pub fn chebyshev_blocks(l: &Mat, x: &Mat, k: usize) -> Vec<Mat> {
    let mut polys = vec![Mat::identity(l.rows)];
    if k >= 1 {
        polys.push(l.clone());
    }
    for t in 2..=k {
        let next = l.mul(&polys[t - 1]).scale(2.0).sub(&polys[t - 2]);
        polys.push(next);
    }
    polys.iter().map(|p| p.mul(x)).collect()
}

/// `2^{-K} C(K,t) (2I − L)^{K−t} L^t X`.
pub fn bernstein_blocks(l: &Mat, x: &Mat, k: usize) -> Vec<Mat> {
    let shifted = Mat::identity(l.rows).scale(2.0).sub(l);
    (0..=k)
        .map(|t| {
            let p = mat_pow(&shifted, k - t).mul(&mat_pow(l, t));
            p.mul(x).scale(binomial(k, t) / 2f64.powi(k as i32))
        })
        .collect()
}

/// Eigenvalues and eigenvectors (columns) of a symmetric matrix by cyclic
/// Jacobi rotations. Values are unsorted.
pub fn jacobi_eigen(sym: &Mat) -> (Vec<f64>, Mat) {
    let n = sym.rows;
    let mut a = sym.clone();
    let mut v = Mat::identity(n);
    let scale = a.frobenius().max(f64::MIN_POSITIVE);
    for _ in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a.get(i, j).powi(2))
            .sum::<f64>()
            .sqrt();
        if off <= 1e-15 * scale {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a.get(p, q);
                if apq.abs() < 1e-300 {
                    continue;
                }
                let theta = (a.get(q, q) - a.get(p, p)) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (akp, akq) = (a.get(k, p), a.get(k, q));
                    a.set(k, p, c * akp - s * akq);
                    a.set(k, q, s * akp + c * akq);
                }
                for k in 0..n {
                    let (apk, aqk) = (a.get(p, k), a.get(q, k));
                    a.set(p, k, c * apk - s * aqk);
                    a.set(q, k, s * apk + c * aqk);
                }
                for k in 0..n {
                    let (vkp, vkq) = (v.get(k, p), v.get(k, q));
                    v.set(k, p, c * vkp - s * vkq);
                    v.set(k, q, s * vkp + c * vkq);
                }
            }
        }
    }
    ((0..n).map(|i| a.get(i, i)).collect(), v)
}

/// Singular values of a symmetric matrix, nonincreasing.
pub fn symmetric_singular_values(sym: &Mat) -> Vec<f64> {
    let mut s: Vec<f64> = jacobi_eigen(sym).0.into_iter().map(f64::abs).collect();
    s.sort_by(|a, b| b.partial_cmp(a).unwrap());
    s
}

/// Orthonormal basis of the column space of `a` by modified Gram–Schmidt with
/// one reorthogonalization pass; columns whose remainder falls below
/// `rel_tol` times their original norm are dropped.
pub fn orthonormal_basis(a: &Mat, rel_tol: f64) -> Vec<Vec<f64>> {
    let mut basis: Vec<Vec<f64>> = Vec::new();
    for j in 0..a.cols {
        let mut v = a.column(j);
        let norm0 = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm0 == 0.0 {
            continue;
        }
        for _ in 0..2 {
            for q in &basis {
                let d: f64 = q.iter().zip(&v).map(|(a, b)| a * b).sum();
                v.iter_mut().zip(q).for_each(|(x, qi)| *x -= d * qi);
            }
        }
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > rel_tol * norm0 {
            basis.push(v.into_iter().map(|x| x / norm).collect());
        }
    }
    basis
}

/// `‖B − Q Qᵀ B‖_F` where `Q` spans the columns of `a`: the least-squares residual.
pub fn least_squares_residual(a: &Mat, b: &Mat, rel_tol: f64) -> f64 {
    let q = orthonormal_basis(a, rel_tol);
    let mut total = 0.0;
    for j in 0..b.cols {
        let mut r = b.column(j);
        for _ in 0..2 {
            for qv in &q {
                let d: f64 = qv.iter().zip(&r).map(|(a, b)| a * b).sum();
                r.iter_mut().zip(qv).for_each(|(x, qi)| *x -= d * qi);
            }
        }
        total += r.iter().map(|x| x * x).sum::<f64>();
    }
    total.sqrt()
}

/// Largest `|cos|` over nonzero column pairs by direct double loop; `None` if either side is all zero.
pub fn brute_coherence(m0: &Mat, m1: &Mat) -> Option<f64> {
    let mut best: Option<f64> = None;
    for i in 0..m0.cols {
        let a = m0.column(i);
        let na = a.iter().map(|x| x * x).sum::<f64>().sqrt();
        if na <= 1e-12 {
            continue;
        }
        for j in 0..m1.cols {
            let b = m1.column(j);
            let nb = b.iter().map(|x| x * x).sum::<f64>().sqrt();
            if nb <= 1e-12 {
                continue;
            }
            let dot: f64 = a.iter().zip(&b).map(|(x, y)| x * y).sum();
            let c = (dot / (na * nb)).abs();
            best = Some(best.map_or(c, |v| v.max(c)));
        }
    }
    best
}

/// Masked mean softmax cross-entropy of logits `h`.
pub fn cross_entropy(h: &Mat, y: &[usize], mask: &[bool]) -> f64 {
    let mut total = 0.0;
    let mut count = 0;
    for i in 0..h.rows {
        if !mask[i] {
            continue;
        }
        let row: Vec<f64> = (0..h.cols).map(|j| h.get(i, j)).collect();
        let m = row.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let lse = m + row.iter().map(|v| (v - m).exp()).sum::<f64>().ln();
        total += lse - row[y[i]];
        count += 1;
    }
    total / count as f64
}

/// Central differences of `f` at `x` with step `h`.
pub fn central_gradient(f: impl Fn(&[f64]) -> f64, x: &[f64], h: f64) -> Vec<f64> {
    let mut probe = x.to_vec();
    (0..x.len())
        .map(|i| {
            probe[i] = x[i] + h;
            let up = f(&probe);
            probe[i] = x[i] - h;
            let down = f(&probe);
            probe[i] = x[i];
            (up - down) / (2.0 * h)
        })
        .collect()
}

/// Unrolled activation-free skip-connection network:
/// `H_{k+1} = α_k X W0_k + A H_k W1_k`, starting from `H_0 = X`.
pub fn skip_gcn_recursive(a: &Mat, x: &Mat, w0: &[Mat], w1: &[Mat], alpha: &[f64]) -> Mat {
    let mut h = x.clone();
    for k in 0..w1.len() {
        h = x.mul(&w0[k]).scale(alpha[k]).add(&a.mul(&h).mul(&w1[k]));
    }
    h
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn jacobi_diagonalizes() {
        let m = Mat::from_vec(3, 3, vec![4.0, 1.0, -2.0, 1.0, 2.0, 0.0, -2.0, 0.0, 3.0]);
        let (vals, vecs) = jacobi_eigen(&m);
        let d = Mat::from_fn(3, 3, |i, j| if i == j { vals[i] } else { 0.0 });
        let back = vecs.mul(&d).mul(&vecs.transpose());
        assert!(back.max_abs_diff(&m) < 1e-12);
        assert!((vals.iter().sum::<f64>() - 9.0).abs() < 1e-12);
    }

    #[test]
    fn residual_of_contained_column_is_zero() {
        let a = Mat::from_vec(3, 2, vec![1.0, 0.0, 0.0, 1.0, 0.0, 0.0]);
        let b = Mat::from_vec(3, 1, vec![2.0, -1.0, 0.0]);
        assert!(least_squares_residual(&a, &b, 1e-12) < 1e-15);
        let b = Mat::from_vec(3, 1, vec![0.0, 0.0, 3.0]);
        assert!((least_squares_residual(&a, &b, 1e-12) - 3.0).abs() < 1e-15);
    }
}
