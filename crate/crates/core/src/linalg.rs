//! Dense kernels: truncated SVD, column-pivoted QR, symmetric square root,
//! Gaussian sketching and the log-determinant criterion `Ψ`.

use alloc::vec;
use alloc::vec::Vec;

use nalgebra::{Cholesky, DVector, Dyn};
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::math::{ln, ln_1p, sqrt};
use crate::rng;
use crate::Matrix;

/// Rank-`k` truncated singular value decomposition `A ≈ U diag(σ) Vᵀ`.
#[derive(Debug, Clone)]
pub struct TruncatedSvd {
    pub u: Matrix,
    /// Descending singular values.
    pub sigma: Vec<f64>,
    pub v: Matrix,
}

fn check_rank(a: &Matrix, k: usize) -> Result<()> {
    let max = a.nrows().min(a.ncols());
    if k == 0 || k > max {
        return Err(Error::CountOutOfRange { k, max });
    }
    Ok(())
}

fn check_finite(a: &Matrix) -> Result<()> {
    if a.iter().all(|x| x.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite)
    }
}

/// Top-`k` singular triplets, computed from a full thin SVD.
pub fn truncated_svd(a: &Matrix, k: usize) -> Result<TruncatedSvd> {
    check_rank(a, k)?;
    check_finite(a)?;
    let svd = a.clone().svd(true, true);
    let order = descending_order(svd.singular_values.as_slice());
    let u_full = svd.u.expect("requested U");
    let vt_full = svd.v_t.expect("requested Vᵀ");
    let mut u = Matrix::zeros(a.nrows(), k);
    let mut v = Matrix::zeros(a.ncols(), k);
    let mut sigma = Vec::with_capacity(k);
    for (c, &i) in order.iter().take(k).enumerate() {
        u.set_column(c, &u_full.column(i));
        v.set_column(c, &vt_full.row(i).transpose());
        sigma.push(svd.singular_values[i]);
    }
    Ok(TruncatedSvd { u, sigma, v })
}

/// Top-`k` singular values and right singular vectors only.
pub(crate) fn top_right_singular(a: &Matrix, k: usize) -> Result<(Vec<f64>, Matrix)> {
    check_rank(a, k)?;
    check_finite(a)?;
    let svd = a.clone().svd(false, true);
    let order = descending_order(svd.singular_values.as_slice());
    let vt_full = svd.v_t.expect("requested Vᵀ");
    let mut v = Matrix::zeros(a.ncols(), k);
    let mut sigma = Vec::with_capacity(k);
    for (c, &i) in order.iter().take(k).enumerate() {
        v.set_column(c, &vt_full.row(i).transpose());
        sigma.push(svd.singular_values[i]);
    }
    Ok((sigma, v))
}

/// All singular values in descending order.
pub fn singular_values(a: &Matrix) -> Vec<f64> {
    let mut s: Vec<f64> = a.singular_values().iter().copied().collect();
    s.sort_by(|x, y| y.total_cmp(x));
    s
}

fn descending_order(values: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&i, &j| values[j].total_cmp(&values[i]).then(i.cmp(&j)));
    order
}

/// First `k` pivots of Businger–Golub column-pivoted QR.
///
/// Each step picks the column with the largest residual 2-norm; ties go to
/// the lowest column index. Residual norms are recomputed rather than
/// downdated, so exact ties stay exact. Once the rows are exhausted every
/// residual is zero and the remaining pivots fill in by index.
pub fn cpqr_pivots(m: &Matrix, k: usize) -> Result<Vec<usize>> {
    let (rows, cols) = m.shape();
    if k == 0 || k > cols {
        return Err(Error::CountOutOfRange { k, max: cols });
    }
    check_finite(m)?;
    let mut w = m.clone();
    let mut picked = vec![false; cols];
    let mut pivots = Vec::with_capacity(k);
    for step in 0..k {
        let mut best = usize::MAX;
        let mut best_norm = -1.0;
        for j in (0..cols).filter(|&j| !picked[j]) {
            let norm: f64 = (step..rows).map(|i| w[(i, j)] * w[(i, j)]).sum();
            if norm > best_norm {
                best_norm = norm;
                best = j;
            }
        }
        picked[best] = true;
        pivots.push(best);
        if step >= rows {
            continue;
        }
        // Householder reflector annihilating column `best` below `step`.
        let x0 = w[(step, best)];
        let norm_x = sqrt(best_norm);
        if norm_x == 0.0 {
            continue;
        }
        let alpha = if x0 >= 0.0 { -norm_x } else { norm_x };
        let mut v: Vec<f64> = (step..rows).map(|i| w[(i, best)]).collect();
        v[0] -= alpha;
        let vtv: f64 = v.iter().map(|x| x * x).sum();
        if vtv == 0.0 {
            continue;
        }
        for j in (0..cols).filter(|&j| !picked[j]) {
            let dot: f64 = v.iter().enumerate().map(|(t, vi)| vi * w[(step + t, j)]).sum();
            let f = 2.0 * dot / vtv;
            for (t, vi) in v.iter().enumerate() {
                w[(step + t, j)] -= f * vi;
            }
        }
        w[(step, best)] = alpha;
        for i in step + 1..rows {
            w[(i, best)] = 0.0;
        }
    }
    Ok(pivots)
}

/// `log det` of a symmetric positive definite matrix via Cholesky.
pub fn logdet_spd(p: &Matrix) -> Option<f64> {
    let chol = Cholesky::new(p.clone())?;
    let l = chol.l_dirty();
    Some((0..p.nrows()).map(|i| 2.0 * ln(l[(i, i)])).sum())
}

/// `Ψ(A) = log det(I + AAᵀ) = Σ log(1 + σ_i²)`.
///
/// Evaluated as the log-determinant of `I` plus the Gram matrix of the
/// smaller dimension; every eigenvalue of that matrix is at least one.
pub fn psi(a: &Matrix) -> Result<f64> {
    check_finite(a)?;
    if a.nrows() == 0 || a.ncols() == 0 {
        return Ok(0.0);
    }
    let mut g = if a.nrows() <= a.ncols() {
        a * a.transpose()
    } else {
        a.tr_mul(a)
    };
    for i in 0..g.nrows() {
        g[(i, i)] += 1.0;
    }
    logdet_spd(&g).ok_or(Error::NonFinite)
}

/// `Σ log(1 + σ_i²)` for given singular values.
pub fn psi_from_singular_values(sigma: &[f64]) -> f64 {
    sigma.iter().map(|s| ln_1p(s * s)).sum()
}

/// `r × n` Gaussian test matrix with i.i.d. `N(0, 1/r)` entries.
///
/// Entries are drawn in column-major order from the ChaCha20 stream
/// `(seed, SKETCH)`.
pub fn gaussian_sketch(r: usize, n: usize, seed: u64) -> Matrix {
    let mut rng = rng::stream(seed, rng::purpose::SKETCH);
    let scale = 1.0 / sqrt(r as f64);
    let data: Vec<f64> = (0..r * n)
        .map(|_| {
            let z: f64 = StandardNormal.sample(&mut rng);
            z * scale
        })
        .collect();
    Matrix::from_vec(r, n, data)
}

const SYMMETRY_TOL: f64 = 1e-10;
const EIGEN_CLIP: f64 = 1e-8;

/// Symmetric square root of a symmetric positive semidefinite matrix.
///
/// Tolerances are relative to `max(1, max|c_ij|)` for symmetry and
/// `max(1, max|λ|)` for the eigenvalue floor; small negative eigenvalues are
/// clipped to zero.
pub fn sym_sqrt(c: &Matrix) -> Result<Matrix> {
    if !c.is_square() {
        return Err(Error::DimensionMismatch {
            context: "sym_sqrt square input",
            expected: c.nrows(),
            found: c.ncols(),
        });
    }
    check_finite(c)?;
    let n = c.nrows();
    let scale = c.iter().fold(1.0f64, |m, x| m.max(x.abs()));
    let mut deviation = 0.0f64;
    for i in 0..n {
        for j in 0..i {
            deviation = deviation.max((c[(i, j)] - c[(j, i)]).abs());
        }
    }
    if deviation > SYMMETRY_TOL * scale {
        return Err(Error::NotSymmetric { deviation });
    }
    let eig = c.clone().symmetric_eigen();
    let lam_scale = eig.eigenvalues.iter().fold(1.0f64, |m, x| m.max(x.abs()));
    let mut roots = DVector::<f64>::zeros(n);
    for (i, &lam) in eig.eigenvalues.iter().enumerate() {
        if lam < -EIGEN_CLIP * lam_scale {
            return Err(Error::NegativeEigenvalue { value: lam });
        }
        roots[i] = sqrt(lam.max(0.0));
    }
    let q = &eig.eigenvectors;
    let mut scaled = q.clone();
    for (j, mut col) in scaled.column_iter_mut().enumerate() {
        col *= roots[j];
    }
    let b = &scaled * q.transpose();
    Ok((&b + b.transpose()) * 0.5)
}

/// Numerical-rank threshold for certificate reporting.
pub const RANK_TOL: f64 = 1e-12;

/// `‖(Sᵀ V_K)^{-1}‖₂` for the rows `sel` of `V_K`; `+∞` when the selected
/// block is numerically singular.
pub fn gks_certificate(v_k: &Matrix, sel: &[usize]) -> Result<f64> {
    let k = v_k.ncols();
    if sel.len() != k {
        return Err(Error::DimensionMismatch {
            context: "certificate selection size",
            expected: k,
            found: sel.len(),
        });
    }
    if let Some(&bad) = sel.iter().find(|&&i| i >= v_k.nrows()) {
        return Err(Error::IndexOutOfRange {
            index: bad,
            size: v_k.nrows(),
        });
    }
    let block = v_k.select_rows(sel.iter());
    let s = singular_values(&block);
    let (max, min) = (s[0], s[s.len() - 1]);
    if max == 0.0 || min <= RANK_TOL * max {
        return Ok(f64::INFINITY);
    }
    Ok(1.0 / min)
}

/// Solves `L X = B` for lower-triangular `L` in place of `B`.
pub(crate) fn solve_lower_in_place(l: &Matrix, b: &mut Matrix) {
    let n = l.nrows();
    for c in 0..b.ncols() {
        for i in 0..n {
            let mut s = b[(i, c)];
            for t in 0..i {
                s -= l[(i, t)] * b[(t, c)];
            }
            b[(i, c)] = s / l[(i, i)];
        }
    }
}

/// Lower Cholesky factor of an SPD matrix.
pub(crate) fn cholesky_lower(p: Matrix) -> Option<Matrix> {
    Cholesky::<f64, Dyn>::new(p).map(|c| c.unpack())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn svd_of_simple_matrices() {
        let s = truncated_svd(&Matrix::identity(3, 3), 2).unwrap();
        assert_eq!(s.sigma.len(), 2);
        assert!((s.sigma[0] - 1.0).abs() < 1e-14 && (s.sigma[1] - 1.0).abs() < 1e-14);
        let d = Matrix::from_diagonal(&DVector::from_vec(vec![3.0, 2.0, 1.0]));
        let s = truncated_svd(&d, 2).unwrap();
        assert!((s.sigma[0] - 3.0).abs() < 1e-14 && (s.sigma[1] - 2.0).abs() < 1e-14);
        assert!(truncated_svd(&d, 0).is_err());
        assert!(truncated_svd(&d, 4).is_err());
    }

    #[test]
    fn cpqr_examples() {
        let m = Matrix::from_row_slice(1, 3, &[0.0, 2.0, 1.0]);
        assert_eq!(cpqr_pivots(&m, 1).unwrap(), vec![1]);
        assert_eq!(cpqr_pivots(&Matrix::identity(3, 3), 3).unwrap(), vec![0, 1, 2]);
        assert!(cpqr_pivots(&m, 4).is_err());
        // more pivots than rows: the tail fills in by index
        assert_eq!(cpqr_pivots(&m, 3).unwrap(), vec![1, 0, 2]);
    }

    #[test]
    fn psi_examples() {
        assert_eq!(psi(&Matrix::zeros(3, 4)).unwrap(), 0.0);
        let n = 5;
        let v = psi(&Matrix::identity(n, n)).unwrap();
        assert!((v - n as f64 * core::f64::consts::LN_2).abs() < 1e-13);
        let mut bad = Matrix::zeros(2, 2);
        bad[(0, 1)] = f64::NAN;
        assert_eq!(psi(&bad), Err(Error::NonFinite));
    }

    #[test]
    fn sym_sqrt_examples() {
        let b = sym_sqrt(&Matrix::identity(3, 3)).unwrap();
        assert!((b - Matrix::identity(3, 3)).norm() < 1e-14);
        let c = Matrix::from_diagonal(&DVector::from_vec(vec![4.0, 9.0]));
        let b = sym_sqrt(&c).unwrap();
        assert!((b - Matrix::from_diagonal(&DVector::from_vec(vec![2.0, 3.0]))).norm() < 1e-13);
        let asym = Matrix::from_row_slice(2, 2, &[1.0, 0.5, 0.0, 1.0]);
        assert!(matches!(sym_sqrt(&asym), Err(Error::NotSymmetric { .. })));
        let neg = Matrix::from_diagonal(&DVector::from_vec(vec![1.0, -0.1]));
        assert!(matches!(sym_sqrt(&neg), Err(Error::NegativeEigenvalue { .. })));
        let tiny = Matrix::from_diagonal(&DVector::from_vec(vec![1.0, -1e-13]));
        assert!(sym_sqrt(&tiny).is_ok());
    }

    #[test]
    fn certificate_on_exact_basis() {
        let v = Matrix::identity(5, 2);
        assert!((gks_certificate(&v, &[0, 1]).unwrap() - 1.0).abs() < 1e-14);
        assert_eq!(gks_certificate(&v, &[2, 3]).unwrap(), f64::INFINITY);
        assert!(gks_certificate(&v, &[0]).is_err());
    }

    #[test]
    fn sketch_is_deterministic() {
        assert_eq!(gaussian_sketch(3, 4, 11), gaussian_sketch(3, 4, 11));
        assert_ne!(gaussian_sketch(3, 4, 11), gaussian_sketch(3, 4, 12));
    }
}
