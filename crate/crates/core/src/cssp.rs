//! Column subset selection engines sharing one interface: given a matrix and
//! a count `k`, return `k` distinct column indices.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::linalg::{cholesky_lower, cpqr_pivots, gks_certificate, solve_lower_in_place, top_right_singular, RANK_TOL};
use crate::math::ln;
use crate::Matrix;

/// Which column selection engine to run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum CsspMethod {
    /// Truncated SVD followed by column-pivoted QR on `V_Kᵀ`.
    #[default]
    Gks,
    /// Sequential DEIM point selection on the rows of `V_K`.
    Deim,
    /// Greedy log-determinant maximization. With a candidate cap only the
    /// `cap` unselected candidates of largest squared norm compete per step.
    Greedy { candidate_cap: Option<usize> },
}

impl CsspMethod {
    pub fn greedy() -> Self {
        CsspMethod::Greedy { candidate_cap: None }
    }

    pub fn name(&self) -> &'static str {
        match self {
            CsspMethod::Gks => "gks",
            CsspMethod::Deim => "deim",
            CsspMethod::Greedy { .. } => "greedy",
        }
    }
}

/// Selected columns in selection order.
#[derive(Debug, Clone, PartialEq)]
pub struct ColumnSelection {
    pub indices: Vec<usize>,
    /// `‖(Sᵀ V_K)^{-1}‖₂`, populated by GKS; `+∞` flags a singular block.
    pub certificate: Option<f64>,
}

fn check_count(a: &Matrix, k: usize) -> Result<()> {
    let max = a.nrows().min(a.ncols());
    if k == 0 || k > max {
        return Err(Error::CountOutOfRange { k, max });
    }
    Ok(())
}

/// Golub–Klema–Stewart selection.
pub fn cssp_gks(a: &Matrix, k: usize) -> Result<ColumnSelection> {
    check_count(a, k)?;
    let (_, v) = top_right_singular(a, k)?;
    let indices = cpqr_pivots(&v.transpose(), k)?;
    let certificate = gks_certificate(&v, &indices)?;
    Ok(ColumnSelection {
        indices,
        certificate: Some(certificate),
    })
}

/// DEIM point selection on the top-`k` right singular vectors.
pub fn cssp_deim(a: &Matrix, k: usize) -> Result<ColumnSelection> {
    check_count(a, k)?;
    let (_, v) = top_right_singular(a, k)?;
    Ok(ColumnSelection {
        indices: deim_points(&v)?,
        certificate: None,
    })
}

/// DEIM on the columns of `v` (one point per column).
pub fn deim_points(v: &Matrix) -> Result<Vec<usize>> {
    let (m, k) = v.shape();
    let mut points = Vec::with_capacity(k);
    points.push(argmax_abs(v.column(0).iter().copied()));
    for j in 1..k {
        let basis = v.columns(0, j);
        let block = basis.select_rows(points.iter());
        let rhs = nalgebra::DVector::from_iterator(j, points.iter().map(|&p| v[(p, j)]));
        let s = crate::linalg::singular_values(&block);
        if s[0] == 0.0 || s[s.len() - 1] <= RANK_TOL * s[0] {
            return Err(Error::SingularInterpolation { step: j });
        }
        let coeff = block.lu().solve(&rhs).ok_or(Error::SingularInterpolation { step: j })?;
        let residual = v.column(j) - basis * coeff;
        let next = argmax_abs(residual.iter().copied());
        if points.contains(&next) || next >= m {
            return Err(Error::SingularInterpolation { step: j });
        }
        points.push(next);
    }
    Ok(points)
}

fn argmax_abs(values: impl Iterator<Item = f64>) -> usize {
    let mut best = 0;
    let mut best_val = -1.0;
    for (i, x) in values.enumerate() {
        if x.abs() > best_val {
            best_val = x.abs();
            best = i;
        }
    }
    best
}

/// Greedy column selection maximizing `Ψ(A S)` one column at a time.
pub fn cssp_greedy_matrix(a: &Matrix, k: usize, candidate_cap: Option<usize>) -> Result<ColumnSelection> {
    if k == 0 || k > a.ncols() {
        return Err(Error::CountOutOfRange { k, max: a.ncols() });
    }
    if !a.iter().all(|x| x.is_finite()) {
        return Err(Error::NonFinite);
    }
    let gram = a.tr_mul(a);
    let groups: Vec<Vec<usize>> = (0..a.ncols()).map(|c| alloc::vec![c]).collect();
    let path = greedy_groups(&gram, &groups, k, candidate_cap)?;
    Ok(ColumnSelection {
        indices: path.picks,
        certificate: None,
    })
}

/// Dispatches to the engine named by `method`.
pub fn select_columns(a: &Matrix, k: usize, method: CsspMethod) -> Result<ColumnSelection> {
    match method {
        CsspMethod::Gks => cssp_gks(a, k),
        CsspMethod::Deim => cssp_deim(a, k),
        CsspMethod::Greedy { candidate_cap } => cssp_greedy_matrix(a, k, candidate_cap),
    }
}

/// Outcome of a greedy run: picks in order and `Ψ` after each pick.
#[derive(Debug, Clone, PartialEq)]
pub struct GreedyPath {
    pub picks: Vec<usize>,
    pub objective: Vec<f64>,
}

/// Greedily picks `k` groups of Gram columns maximizing
/// `log det(I + G_{U,U})` over the union `U` of picked groups.
///
/// Candidates are scored through the Schur complement of the current
/// Cholesky factor, so each score is `Ψ(after) − Ψ(before)`. Ties go to the
/// lowest group index.
pub(crate) fn greedy_groups(
    gram: &Matrix,
    groups: &[Vec<usize>],
    k: usize,
    candidate_cap: Option<usize>,
) -> Result<GreedyPath> {
    let mut picked = alloc::vec![false; groups.len()];
    let mut union: Vec<usize> = Vec::new();
    let mut chol = Matrix::zeros(0, 0);
    let mut total = 0.0;
    let mut path = GreedyPath {
        picks: Vec::with_capacity(k),
        objective: Vec::with_capacity(k),
    };
    for _ in 0..k {
        let mut candidates: Vec<usize> = (0..groups.len()).filter(|&g| !picked[g]).collect();
        if let Some(cap) = candidate_cap {
            if cap > 0 && cap < candidates.len() {
                let weight = |g: usize| groups[g].iter().map(|&c| gram[(c, c)]).sum::<f64>();
                candidates.sort_by(|&x, &y| weight(y).total_cmp(&weight(x)).then(x.cmp(&y)));
                candidates.truncate(cap);
                candidates.sort_unstable();
            }
        }
        let mut best: Option<(usize, f64, Matrix, Matrix)> = None;
        for g in candidates {
            let Some((gain, w, l_c)) = schur_gain(gram, &union, &chol, &groups[g]) else {
                continue;
            };
            if best.as_ref().is_none_or(|b| gain > b.1) {
                best = Some((g, gain, w, l_c));
            }
        }
        let (g, gain, w, l_c) = best.ok_or(Error::NonFinite)?;
        // Extend the Cholesky factor: [[L, 0], [Wᵀ, L_C]].
        let s = union.len();
        let t = groups[g].len();
        let mut next = Matrix::zeros(s + t, s + t);
        next.view_mut((0, 0), (s, s)).copy_from(&chol);
        next.view_mut((s, 0), (t, s)).copy_from(&w.transpose());
        next.view_mut((s, s), (t, t)).copy_from(&l_c);
        chol = next;
        union.extend_from_slice(&groups[g]);
        picked[g] = true;
        total += gain;
        path.picks.push(g);
        path.objective.push(total);
    }
    Ok(path)
}

/// Returns `(log det C, W, chol(C))` with `W = L^{-1} G_{U,T}` and
/// `C = I + G_{T,T} − WᵀW`.
fn schur_gain(gram: &Matrix, union: &[usize], chol: &Matrix, group: &[usize]) -> Option<(f64, Matrix, Matrix)> {
    let t = group.len();
    let mut w = Matrix::zeros(union.len(), t);
    for (c, &col) in group.iter().enumerate() {
        for (r, &row) in union.iter().enumerate() {
            w[(r, c)] = gram[(row, col)];
        }
    }
    if !union.is_empty() {
        solve_lower_in_place(chol, &mut w);
    }
    let mut c = Matrix::zeros(t, t);
    for (i, &ci) in group.iter().enumerate() {
        for (j, &cj) in group.iter().enumerate() {
            c[(i, j)] = gram[(ci, cj)];
        }
        c[(i, i)] += 1.0;
    }
    if !union.is_empty() {
        c -= w.tr_mul(&w);
    }
    let l_c = cholesky_lower(c)?;
    let gain: f64 = (0..t).map(|i| 2.0 * ln(l_c[(i, i)])).sum();
    gain.is_finite().then_some((gain, w, l_c))
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use nalgebra::DVector;

    fn diag(v: &[f64]) -> Matrix {
        Matrix::from_diagonal(&DVector::from_column_slice(v))
    }

    #[test]
    fn dominant_column_is_chosen_first() {
        let a = diag(&[1.0, 5.0, 3.0]);
        assert_eq!(cssp_gks(&a, 1).unwrap().indices, vec![1]);
        assert_eq!(cssp_deim(&a, 1).unwrap().indices, vec![1]);
        assert_eq!(cssp_greedy_matrix(&a, 1, None).unwrap().indices, vec![1]);
        let mut g = cssp_greedy_matrix(&a, 2, None).unwrap().indices;
        g.sort_unstable();
        assert_eq!(g, vec![1, 2]);
    }

    #[test]
    fn duplicate_columns_are_not_both_selected() {
        let a = Matrix::from_row_slice(2, 3, &[1.0, 1.0, 0.0, 0.0, 0.0, 1.0]);
        for method in [CsspMethod::Gks, CsspMethod::Deim, CsspMethod::greedy()] {
            let mut s = select_columns(&a, 2, method).unwrap().indices;
            s.sort_unstable();
            assert!(s == vec![0, 2] || s == vec![1, 2], "{method:?} picked {s:?}");
        }
    }

    #[test]
    fn deim_on_orthogonal_matrix_selects_everything() {
        let a = diag(&[2.0, 7.0, 4.0]);
        let s = cssp_deim(&a, 3).unwrap().indices;
        assert_eq!(s, vec![1, 2, 0]);
    }

    #[test]
    fn range_checks() {
        let a = Matrix::zeros(2, 3);
        assert!(cssp_gks(&a, 3).is_err());
        assert!(cssp_deim(&a, 0).is_err());
        assert!(cssp_greedy_matrix(&a, 4, None).is_err());
        assert!(cssp_greedy_matrix(&a, 3, None).is_ok());
    }

    #[test]
    fn candidate_cap_restricts_by_norm() {
        let a = diag(&[1.0, 5.0, 3.0, 4.0]);
        let s = cssp_greedy_matrix(&a, 2, Some(2)).unwrap().indices;
        assert_eq!(s, vec![1, 3]);
    }
}
