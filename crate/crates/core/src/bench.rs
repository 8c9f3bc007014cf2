//! Ground-truth baselines: exhaustive enumeration of structured designs,
//! seeded random designs and percentile statistics.

use alloc::vec::Vec;
use core::ops::Range;

use rand::seq::index::sample;

use crate::error::{Error, Result};
use crate::linalg::psi;
use crate::math::ln;
use crate::rng::{purpose, stream};
use crate::selection::SelectionOperator;
use crate::Matrix;

/// Default cap on the number of designs an exhaustive search may visit.
pub const DEFAULT_BUDGET: u128 = 1_000_000;

/// `C(n, k)`, saturating at `u128::MAX`.
pub fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = match acc.checked_mul((n - i) as u128) {
            Some(v) => v / (i + 1) as u128,
            None => return u128::MAX,
        };
    }
    acc
}

/// `Π_j C(m_j, k_j)`.
pub fn design_count(mode_sizes: &[usize], k: &[usize]) -> u128 {
    mode_sizes
        .iter()
        .zip(k)
        .fold(1u128, |acc, (&m, &kj)| acc.saturating_mul(binomial(m, kj)))
}

/// All structured designs with counts `k`, ordered lexicographically by
/// per-mode combination with mode 1 most significant.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DesignSpace {
    mode_sizes: Vec<usize>,
    k: Vec<usize>,
    counts: Vec<u128>,
    len: u128,
}

impl DesignSpace {
    pub fn new(mode_sizes: &[usize], k: &[usize]) -> Result<Self> {
        if mode_sizes.is_empty() || mode_sizes.len() != k.len() {
            return Err(Error::DimensionMismatch {
                context: "per-mode counts",
                expected: mode_sizes.len(),
                found: k.len(),
            });
        }
        for (&m, &kj) in mode_sizes.iter().zip(k) {
            if kj == 0 || kj > m {
                return Err(Error::CountOutOfRange { k: kj, max: m });
            }
        }
        let counts: Vec<u128> = mode_sizes.iter().zip(k).map(|(&m, &kj)| binomial(m, kj)).collect();
        Ok(Self {
            mode_sizes: mode_sizes.to_vec(),
            k: k.to_vec(),
            len: design_count(mode_sizes, k),
            counts,
        })
    }

    pub fn len(&self) -> u128 {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn mode_sizes(&self) -> &[usize] {
        &self.mode_sizes
    }

    pub fn k(&self) -> &[usize] {
        &self.k
    }

    /// Per-mode combinations of design number `index`.
    fn combos_at(&self, mut index: u128) -> Vec<Vec<usize>> {
        let d = self.mode_sizes.len();
        let mut ranks = alloc::vec![0u128; d];
        for j in (0..d).rev() {
            ranks[j] = index % self.counts[j];
            index /= self.counts[j];
        }
        (0..d)
            .map(|j| unrank_combination(self.mode_sizes[j], self.k[j], ranks[j]))
            .collect()
    }

    pub fn design_at(&self, index: u128) -> Result<SelectionOperator> {
        if index >= self.len {
            return Err(Error::IndexOutOfRange {
                index: usize::try_from(index).unwrap_or(usize::MAX),
                size: usize::try_from(self.len).unwrap_or(usize::MAX),
            });
        }
        SelectionOperator::new(self.mode_sizes.clone(), self.combos_at(index))
    }

    /// Calls `f(index, design)` for every design with index in `range`.
    pub fn for_each_in(&self, range: Range<u128>, mut f: impl FnMut(u128, &SelectionOperator)) -> Result<()> {
        let end = range.end.min(self.len);
        if range.start >= end {
            return Ok(());
        }
        let mut combos = self.combos_at(range.start);
        let mut index = range.start;
        loop {
            let sel = SelectionOperator::new(self.mode_sizes.clone(), combos.clone())?;
            f(index, &sel);
            index += 1;
            if index >= end {
                return Ok(());
            }
            // Odometer step: last mode fastest.
            for j in (0..combos.len()).rev() {
                if next_combination(&mut combos[j], self.mode_sizes[j]) {
                    break;
                }
                combos[j] = (0..self.k[j]).collect();
            }
        }
    }
}

/// Lexicographic rank-`rank` `k`-subset of `0..n`.
fn unrank_combination(n: usize, k: usize, mut rank: u128) -> Vec<usize> {
    let mut out = Vec::with_capacity(k);
    let mut next = 0;
    for slot in 0..k {
        let remaining = k - slot - 1;
        loop {
            let with_next = binomial(n - next - 1, remaining);
            if rank < with_next {
                break;
            }
            rank -= with_next;
            next += 1;
        }
        out.push(next);
        next += 1;
    }
    out
}

/// Advances to the lexicographic successor; `false` after the last subset.
fn next_combination(c: &mut [usize], n: usize) -> bool {
    let k = c.len();
    for i in (0..k).rev() {
        if c[i] < n - k + i {
            c[i] += 1;
            for j in i + 1..k {
                c[j] = c[j - 1] + 1;
            }
            return true;
        }
    }
    false
}

#[derive(Debug, Clone)]
enum Route {
    /// `log det(I + G_SS)` with `G = AᵀA`.
    Column { gram: Matrix },
    /// `log det P + log det((P^{-1})_{S̄S̄})` with `P = I + AᵀA`.
    Complement { p_inv: Matrix, logdet_p: f64 },
    /// `Ψ(A_S)` directly.
    Row { a: Matrix },
}

/// Fast repeated evaluation of `φ_EIG` for designs of a fixed size.
#[derive(Debug, Clone)]
pub struct DesignEvaluator {
    mode_sizes: Vec<usize>,
    route: Route,
}

impl DesignEvaluator {
    /// Prepares the cheapest of three equivalent evaluation routes for
    /// designs with `selected` columns.
    pub fn new(a: &Matrix, mode_sizes: &[usize], selected: usize) -> Result<Self> {
        let m: usize = mode_sizes.iter().product();
        if a.ncols() != m {
            return Err(Error::DimensionMismatch {
                context: "matrix columns vs mode sizes",
                expected: m,
                found: a.ncols(),
            });
        }
        if !a.iter().all(|v| v.is_finite()) {
            return Err(Error::NonFinite);
        }
        let n = a.nrows();
        let unselected = m.saturating_sub(selected);
        let route = if n < selected.min(unselected) {
            Route::Row { a: a.clone() }
        } else if selected <= unselected {
            Route::Column { gram: a.tr_mul(a) }
        } else {
            let mut p = a.tr_mul(a);
            for i in 0..m {
                p[(i, i)] += 1.0;
            }
            let chol = nalgebra::Cholesky::new(p).ok_or(Error::NonFinite)?;
            let logdet_p = chol.l_dirty().diagonal().iter().map(|&x| 2.0 * ln(x)).sum();
            Route::Complement {
                p_inv: chol.inverse(),
                logdet_p,
            }
        };
        Ok(Self {
            mode_sizes: mode_sizes.to_vec(),
            route,
        })
    }

    pub fn route_name(&self) -> &'static str {
        match self.route {
            Route::Column { .. } => "column",
            Route::Complement { .. } => "complement",
            Route::Row { .. } => "row",
        }
    }

    pub fn evaluate(&self, sel: &SelectionOperator) -> Result<f64> {
        if sel.mode_sizes() != self.mode_sizes.as_slice() {
            return Err(Error::DimensionMismatch {
                context: "selection vs evaluator modes",
                expected: self.mode_sizes.iter().product(),
                found: sel.mode_sizes().iter().product(),
            });
        }
        let cols = sel.column_indices();
        match &self.route {
            Route::Column { gram } => principal_logdet(gram, &cols, 1.0).ok_or(Error::NonFinite),
            Route::Complement { p_inv, logdet_p } => {
                let mut keep = alloc::vec![false; p_inv.nrows()];
                for &c in &cols {
                    keep[c] = true;
                }
                let rest: Vec<usize> = (0..keep.len()).filter(|&c| !keep[c]).collect();
                let tail = principal_logdet(p_inv, &rest, 0.0).ok_or(Error::NonFinite)?;
                Ok(logdet_p + tail)
            }
            Route::Row { a } => psi(&a.select_columns(cols.iter())),
        }
    }
}

/// `log det(shift·I + G_II)` by an in-place Cholesky on the gathered block.
fn principal_logdet(g: &Matrix, idx: &[usize], shift: f64) -> Option<f64> {
    let n = idx.len();
    let mut buf = alloc::vec![0.0; n * n];
    for (c, &jc) in idx.iter().enumerate() {
        for (r, &ir) in idx.iter().enumerate().skip(c) {
            buf[r + n * c] = g[(ir, jc)];
        }
        buf[c + n * c] += shift;
    }
    let mut logdet = 0.0;
    for j in 0..n {
        let mut diag = buf[j + n * j];
        for p in 0..j {
            diag -= buf[j + n * p] * buf[j + n * p];
        }
        if diag.is_nan() || diag <= 0.0 {
            return None;
        }
        let l = crate::math::sqrt(diag);
        buf[j + n * j] = l;
        logdet += 2.0 * ln(l);
        for i in j + 1..n {
            let mut s = buf[i + n * j];
            for p in 0..j {
                s -= buf[i + n * p] * buf[j + n * p];
            }
            buf[i + n * j] = s / l;
        }
    }
    Some(logdet)
}

/// Objective values of a design population.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct DesignDistribution {
    pub values: Vec<f64>,
    /// Random populations keep their designs; exhaustive ones are
    /// recoverable from [`DesignSpace::design_at`].
    pub designs: Option<Vec<SelectionOperator>>,
    pub exhaustive: bool,
    pub seed: Option<u64>,
}

impl DesignDistribution {
    /// Index of the first maximal value.
    pub fn argmax(&self) -> Option<usize> {
        let mut best: Option<usize> = None;
        for (i, &v) in self.values.iter().enumerate() {
            if best.is_none_or(|b| v > self.values[b]) {
                best = Some(i);
            }
        }
        best
    }

    pub fn max(&self) -> Option<f64> {
        self.argmax().map(|i| self.values[i])
    }

    pub fn percentile_of(&self, value: f64) -> Option<f64> {
        percentile_of(value, &self.values)
    }
}

/// `100 · #{v < value} / n`; `None` for an empty population.
pub fn percentile_of(value: f64, values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let below = values.iter().filter(|&&v| v < value).count();
    Some(100.0 * below as f64 / values.len() as f64)
}

/// Best design of an exhaustive search.
#[derive(Debug, Clone, PartialEq)]
pub struct ExhaustiveResult {
    pub best: SelectionOperator,
    pub best_index: u128,
    pub distribution: DesignDistribution,
}

/// Checks the budget and builds the design space.
pub fn exhaustive_space(mode_sizes: &[usize], k: &[usize], budget: u128) -> Result<DesignSpace> {
    let space = DesignSpace::new(mode_sizes, k)?;
    if space.len() > budget {
        return Err(Error::BudgetExceeded {
            count: space.len(),
            budget,
        });
    }
    Ok(space)
}

/// Evaluates designs `range` of `space` in order.
pub fn evaluate_range(eval: &DesignEvaluator, space: &DesignSpace, range: Range<u128>) -> Result<Vec<f64>> {
    let mut out = Vec::with_capacity(usize::try_from(range.end.saturating_sub(range.start)).unwrap_or(0));
    let mut err = None;
    space.for_each_in(range, |_, sel| match eval.evaluate(sel) {
        Ok(v) => out.push(v),
        Err(e) => {
            err.get_or_insert(e);
        }
    })?;
    match err {
        Some(e) => Err(e),
        None => Ok(out),
    }
}

/// Assembles an exhaustive result from values listed in design order.
pub fn exhaustive_result(space: &DesignSpace, values: Vec<f64>) -> Result<ExhaustiveResult> {
    let distribution = DesignDistribution {
        values,
        designs: None,
        exhaustive: true,
        seed: None,
    };
    let i = distribution.argmax().ok_or(Error::MissingData("empty design space"))?;
    Ok(ExhaustiveResult {
        best: space.design_at(i as u128)?,
        best_index: i as u128,
        distribution,
    })
}

/// Enumerates every structured design with counts `k` and evaluates
/// `φ_EIG` on each. Refuses when the design count exceeds `budget`.
pub fn exhaustive_search(a: &Matrix, mode_sizes: &[usize], k: &[usize], budget: u128) -> Result<ExhaustiveResult> {
    let space = exhaustive_space(mode_sizes, k, budget)?;
    let eval = DesignEvaluator::new(a, mode_sizes, k.iter().product())?;
    let values = evaluate_range(&eval, &space, 0..space.len())?;
    exhaustive_result(&space, values)
}

/// `count` seeded designs, each drawn uniformly without replacement per mode.
pub fn random_designs(mode_sizes: &[usize], k: &[usize], count: usize, seed: u64) -> Result<Vec<SelectionOperator>> {
    DesignSpace::new(mode_sizes, k)?;
    let mut rng = stream(seed, purpose::RANDOM_DESIGNS);
    (0..count)
        .map(|_| {
            let per_mode = mode_sizes
                .iter()
                .zip(k)
                .map(|(&m, &kj)| sample(&mut rng, m, kj).into_vec())
                .collect();
            SelectionOperator::new(mode_sizes.to_vec(), per_mode)
        })
        .collect()
}

/// Random designs together with their objective values.
pub fn random_design_distribution(
    eval: &DesignEvaluator,
    mode_sizes: &[usize],
    k: &[usize],
    count: usize,
    seed: u64,
) -> Result<DesignDistribution> {
    let designs = random_designs(mode_sizes, k, count, seed)?;
    let values = designs.iter().map(|s| eval.evaluate(s)).collect::<Result<Vec<_>>>()?;
    Ok(DesignDistribution {
        values,
        designs: Some(designs),
        exhaustive: false,
        seed: Some(seed),
    })
}
