mod common;

use common::*;
use structsel_core::cssp::{cssp_deim, cssp_gks, cssp_greedy_matrix, deim_points, select_columns, CsspMethod};
use structsel_core::linalg::{psi, truncated_svd};
use structsel_core::Matrix;

/// DEIM by explicit interpolation solves.
fn deim_oracle(v: &Matrix) -> Vec<usize> {
    let argmax = |x: &[f64]| {
        let mut best = 0;
        for i in 1..x.len() {
            if x[i].abs() > x[best].abs() {
                best = i;
            }
        }
        best
    };
    let col = |j: usize| -> Vec<f64> { (0..v.nrows()).map(|i| v[(i, j)]).collect() };
    let mut p = vec![argmax(&col(0))];
    for j in 1..v.ncols() {
        let m = Matrix::from_fn(j, j, |a, b| v[(p[a], b)]);
        let rhs: Vec<f64> = p.iter().map(|&i| v[(i, j)]).collect();
        let c = lu_solve(&m, &rhs);
        let res: Vec<f64> = (0..v.nrows())
            .map(|i| v[(i, j)] - (0..j).map(|b| v[(i, b)] * c[b]).sum::<f64>())
            .collect();
        p.push(argmax(&res));
    }
    p
}

/// Greedy log-determinant selection, each candidate scored from scratch.
fn greedy_oracle(a: &Matrix, k: usize) -> Vec<usize> {
    let mut picked: Vec<usize> = Vec::new();
    for _ in 0..k {
        let mut best: Option<(usize, f64)> = None;
        for c in (0..a.ncols()).filter(|c| !picked.contains(c)) {
            let mut s = picked.clone();
            s.push(c);
            let v = psi_oracle(&columns(a, &s));
            if best.is_none_or(|(_, b)| v > b) {
                best = Some((c, v));
            }
        }
        picked.push(best.unwrap().0);
    }
    picked
}

#[test]
fn deim_matches_reference() {
    let mut r = rng(20);
    for (n, m, k) in [(6, 15, 4), (10, 8, 5), (5, 30, 5)] {
        let a = random_matrix(&mut r, n, m);
        let v = truncated_svd(&a, k).unwrap().v;
        assert_eq!(deim_points(&v).unwrap(), deim_oracle(&v));
        assert_eq!(cssp_deim(&a, k).unwrap().indices, deim_oracle(&v));
    }
}

#[test]
fn greedy_matches_reference() {
    let mut r = rng(21);
    for (n, m, k) in [(4, 10, 3), (8, 6, 4), (3, 12, 5)] {
        let a = random_matrix(&mut r, n, m);
        assert_eq!(cssp_greedy_matrix(&a, k, None).unwrap().indices, greedy_oracle(&a, k));
    }
}

#[test]
fn engines_return_distinct_in_range_indices() {
    let mut r = rng(22);
    for method in [CsspMethod::Gks, CsspMethod::Deim, CsspMethod::greedy()] {
        for _ in 0..10 {
            let a = random_matrix(&mut r, 7, 11);
            let s = select_columns(&a, 5, method).unwrap().indices;
            let mut sorted = s.clone();
            sorted.sort_unstable();
            sorted.dedup();
            assert_eq!(sorted.len(), 5);
            assert!(s.iter().all(|&i| i < 11));
        }
    }
}

#[test]
fn gks_respects_spectral_sandwich() {
    let mut r = rng(23);
    for k in 1..=4 {
        let a = random_matrix(&mut r, 6, 12);
        let sel = cssp_gks(&a, k).unwrap();
        let cert = sel.certificate.unwrap();
        let t = truncated_svd(&a, k).unwrap();
        let low: f64 = t.sigma.iter().map(|s| (1.0 + (s / cert).powi(2)).ln()).sum();
        let high: f64 = t.sigma.iter().map(|s| (1.0 + s * s).ln()).sum();
        let got = psi(&columns(&a, &sel.indices)).unwrap();
        assert!(low - 1e-9 <= got && got <= high + 1e-9);
    }
}

#[test]
fn greedy_gains_are_nonnegative() {
    let mut r = rng(24);
    let a = random_matrix(&mut r, 5, 9);
    let s = cssp_greedy_matrix(&a, 5, None).unwrap().indices;
    let mut prev = 0.0;
    for t in 1..=5 {
        let v = psi(&columns(&a, &s[..t])).unwrap();
        assert!(v >= prev - 1e-12);
        prev = v;
    }
}
