//! Independent reference implementations shared by the integration tests.
#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use structsel_core::{Matrix, Tensor};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_matrix(r: &mut ChaCha8Rng, rows: usize, cols: usize) -> Matrix {
    Matrix::from_fn(rows, cols, |_, _| r.random_range(-1.0..1.0))
}

pub fn random_tensor(r: &mut ChaCha8Rng, dims: &[usize]) -> Tensor {
    let n: usize = dims.iter().product();
    Tensor::new(dims.to_vec(), (0..n).map(|_| r.random_range(-1.0..1.0)).collect()).unwrap()
}

/// Random matrix with prescribed singular values, built from Householder
/// reflections so that no SVD routine is involved.
pub fn with_spectrum(r: &mut ChaCha8Rng, rows: usize, cols: usize, sigma: &[f64]) -> Matrix {
    let mut a = Matrix::zeros(rows, cols);
    for (i, &s) in sigma.iter().enumerate() {
        a[(i, i)] = s;
    }
    let reflect_left = |a: &mut Matrix, v: &[f64]| {
        let vv: f64 = v.iter().map(|x| x * x).sum();
        for c in 0..a.ncols() {
            let dot: f64 = (0..a.nrows()).map(|i| v[i] * a[(i, c)]).sum();
            for i in 0..a.nrows() {
                a[(i, c)] -= 2.0 * dot / vv * v[i];
            }
        }
    };
    for _ in 0..3 {
        let v: Vec<f64> = (0..rows).map(|_| r.random_range(-1.0..1.0)).collect();
        reflect_left(&mut a, &v);
        let w: Vec<f64> = (0..cols).map(|_| r.random_range(-1.0..1.0)).collect();
        let mut t = a.transpose();
        reflect_left(&mut t, &w);
        a = t.transpose();
    }
    a
}

/// `log |det M|` by Gaussian elimination with partial pivoting.
pub fn lu_logdet(m: &Matrix) -> f64 {
    let n = m.nrows();
    let mut a: Vec<Vec<f64>> = (0..n).map(|i| (0..n).map(|j| m[(i, j)]).collect()).collect();
    let mut logdet = 0.0;
    for k in 0..n {
        let p = (k..n).max_by(|&x, &y| a[x][k].abs().total_cmp(&a[y][k].abs())).unwrap();
        a.swap(k, p);
        let piv = a[k][k];
        logdet += piv.abs().ln();
        for i in k + 1..n {
            let f = a[i][k] / piv;
            for j in k..n {
                a[i][j] -= f * a[k][j];
            }
        }
    }
    logdet
}

/// `log det(I + A Aᵀ)` formed in the row space, by LU.
pub fn psi_oracle(a: &Matrix) -> f64 {
    let n = a.nrows();
    let mut p = Matrix::identity(n, n);
    for i in 0..n {
        for j in 0..n {
            p[(i, j)] += (0..a.ncols()).map(|c| a[(i, c)] * a[(j, c)]).sum::<f64>();
        }
    }
    lu_logdet(&p)
}

/// Solves `M x = b` by Gaussian elimination with partial pivoting.
pub fn lu_solve(m: &Matrix, b: &[f64]) -> Vec<f64> {
    let n = m.nrows();
    let mut a: Vec<Vec<f64>> = (0..n)
        .map(|i| (0..n).map(|j| m[(i, j)]).chain([b[i]]).collect())
        .collect();
    for k in 0..n {
        let p = (k..n).max_by(|&x, &y| a[x][k].abs().total_cmp(&a[y][k].abs())).unwrap();
        a.swap(k, p);
        for i in k + 1..n {
            let f = a[i][k] / a[k][k];
            for j in k..=n {
                a[i][j] -= f * a[k][j];
            }
        }
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let s: f64 = (i + 1..n).map(|j| a[i][j] * x[j]).sum();
        x[i] = (a[i][n] - s) / a[i][i];
    }
    x
}

/// Eigenvalues of a symmetric matrix by cyclic Jacobi rotations, descending.
pub fn jacobi_eigenvalues(m: &Matrix) -> Vec<f64> {
    let n = m.nrows();
    let mut a: Vec<Vec<f64>> = (0..n).map(|i| (0..n).map(|j| m[(i, j)]).collect()).collect();
    for _sweep in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[i][j] * a[i][j])
            .sum();
        if off < 1e-30 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                if a[p][q].abs() < 1e-300 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (akp, akq) = (a[k][p], a[k][q]);
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let (apk, aqk) = (a[p][k], a[q][k]);
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
            }
        }
    }
    let mut ev: Vec<f64> = (0..n).map(|i| a[i][i]).collect();
    ev.sort_by(|x, y| y.total_cmp(x));
    ev
}

/// Kronecker product by explicit index arithmetic.
pub fn kron(a: &Matrix, b: &Matrix) -> Matrix {
    let (ar, ac) = a.shape();
    let (br, bc) = b.shape();
    Matrix::from_fn(ar * br, ac * bc, |i, j| a[(i / br, j / bc)] * b[(i % br, j % bc)])
}

/// `I(:, idx)`.
pub fn selector(m: usize, idx: &[usize]) -> Matrix {
    Matrix::from_fn(m, idx.len(), |i, j| if idx[j] == i { 1.0 } else { 0.0 })
}

/// Column `c` of `A` restricted to `cols`, as a dense matrix.
pub fn columns(a: &Matrix, cols: &[usize]) -> Matrix {
    Matrix::from_fn(a.nrows(), cols.len(), |i, j| a[(i, cols[j])])
}

pub fn rel_close(x: f64, y: f64, tol: f64) -> bool {
    (x - y).abs() <= tol * x.abs().max(y.abs()).max(1.0)
}
