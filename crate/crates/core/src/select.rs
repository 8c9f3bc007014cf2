//! Structured selection templates over the modes of a design tensor.
//!
//! The input tensor has dims `(m_1, …, m_d, N)`; its last-mode unfolding is
//! the matrix `A`. Every template returns one index set per design mode.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use rand::seq::index::sample;

use crate::cssp::{greedy_groups, select_columns, CsspMethod, GreedyPath};
use crate::error::{Error, Result};
use crate::linalg::{gaussian_sketch, psi};
use crate::oed::{DesignProblem, Forward};
use crate::rng::{purpose, stream};
use crate::selection::SelectionOperator;
use crate::tensor::{matrix_to_tensor, tensor_to_matrix, ModeShape, Tensor};
use crate::Matrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Template {
    Ind,
    Seq,
    Iter,
}

impl Template {
    pub const ALL: [Template; 3] = [Template::Ind, Template::Seq, Template::Iter];

    pub fn name(&self) -> &'static str {
        match self {
            Template::Ind => "ind",
            Template::Seq => "seq",
            Template::Iter => "iter",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Template::ALL.into_iter().find(|t| t.name() == s)
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TemplateConfig {
    /// Per-mode counts `k_j`.
    pub k: Vec<usize>,
    /// Mode processing order (zero-based permutation).
    pub order: Vec<usize>,
    pub cssp: CsspMethod,
    /// Relative-improvement threshold that ends IterSelect.
    pub tol: f64,
    pub max_sweeps: usize,
    pub seed: u64,
}

impl TemplateConfig {
    pub fn new(k: Vec<usize>, cssp: CsspMethod) -> Self {
        let order = (0..k.len()).collect();
        Self {
            k,
            order,
            cssp,
            tol: 1e-10,
            max_sweeps: 20,
            seed: 0,
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_order(mut self, order: Vec<usize>) -> Self {
        self.order = order;
        self
    }

    fn validate(&self, mode_sizes: &[usize]) -> Result<()> {
        if self.k.len() != mode_sizes.len() {
            return Err(Error::DimensionMismatch {
                context: "number of per-mode counts",
                expected: mode_sizes.len(),
                found: self.k.len(),
            });
        }
        for (&k, &m) in self.k.iter().zip(mode_sizes) {
            if k == 0 || k > m {
                return Err(Error::CountOutOfRange { k, max: m });
            }
        }
        let mut seen = alloc::vec![false; self.k.len()];
        if self.order.len() != self.k.len() {
            return Err(Error::InvalidConfig(format!(
                "order must list all {} modes",
                self.k.len()
            )));
        }
        for &j in &self.order {
            if j >= seen.len() || seen[j] {
                return Err(Error::InvalidConfig("order must be a permutation of the modes".into()));
            }
            seen[j] = true;
        }
        if self.max_sweeps == 0 || self.tol.is_nan() || self.tol < 0.0 {
            return Err(Error::InvalidConfig(
                "max_sweeps must be positive and tol nonnegative".into(),
            ));
        }
        Ok(())
    }
}

/// Sketch diagnostics attached to a Sketch-First report.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SketchInfo {
    pub rows: usize,
    pub oversampling: usize,
    /// Objective of the selection on the sketched matrix.
    pub sketched_eig: f64,
    /// True when `eig` could not be re-evaluated on the full matrix.
    pub eig_is_sketched: bool,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SelectionReport {
    pub template: Template,
    pub engine: CsspMethod,
    pub selection: SelectionOperator,
    pub eig: f64,
    /// Sweeps executed by IterSelect; 1 for the other templates.
    pub sweeps: usize,
    /// GKS certificate per mode; `None` for modes taken whole or other engines.
    pub per_mode_certificates: Vec<Option<f64>>,
    /// IterSelect only: objective of the random initial design.
    pub initial_eig: Option<f64>,
    /// IterSelect only: accepted objectives, starting at the initial design.
    pub eig_history: Vec<f64>,
    pub sketch: Option<SketchInfo>,
    pub seed: u64,
    pub warnings: Vec<String>,
}

fn design_modes(x: &Tensor) -> Result<&[usize]> {
    if x.order() < 2 {
        return Err(Error::InvalidConfig("design tensor needs order >= 2".into()));
    }
    Ok(&x.dims()[..x.order() - 1])
}

/// `Ψ` of the last-mode unfolding of `x` restricted to `sel`.
pub fn tensor_eig(x: &Tensor, sel: &SelectionOperator) -> Result<f64> {
    psi(&tensor_to_matrix(&x.apply_selection(sel)?))
}

/// Reselects mode `j` of `x` with the configured engine. Returns ascending
/// indices and the GKS certificate when one applies.
fn mode_cssp(x: &Tensor, j: usize, k: usize, method: CsspMethod) -> Result<(Vec<usize>, Option<f64>)> {
    let m = x.dims()[j];
    if k == m {
        return Ok(((0..m).collect(), None));
    }
    let (mut idx, cert) = match method {
        CsspMethod::Greedy { candidate_cap } => (greedy_mode_select(x, j, k, candidate_cap)?.picks, None),
        _ => {
            let b = x.unfold(j)?.transpose();
            let s = select_columns(&b, k, method)?;
            (s.indices, s.certificate)
        }
    };
    idx.sort_unstable();
    Ok((idx, cert))
}

/// Greedy slice selection on mode `j`: each step adds the slice whose
/// inclusion maximizes `Ψ` of the last-mode unfolding of the accumulated
/// subtensor, all other modes kept whole. Ties go to the lowest index.
pub fn greedy_mode_select(g: &Tensor, j: usize, k: usize, candidate_cap: Option<usize>) -> Result<GreedyPath> {
    let modes = design_modes(g)?;
    if j >= modes.len() {
        return Err(Error::ModeOutOfRange {
            mode: j,
            order: modes.len(),
        });
    }
    let m = modes[j];
    if k == 0 || k > m {
        return Err(Error::CountOutOfRange { k, max: m });
    }
    let a = tensor_to_matrix(g);
    if !a.iter().all(|v| v.is_finite()) {
        return Err(Error::NonFinite);
    }
    let gram = a.tr_mul(&a);
    let left: usize = modes[..j].iter().product();
    let mut groups: Vec<Vec<usize>> = alloc::vec![Vec::new(); m];
    for c in 0..a.ncols() {
        groups[(c / left) % m].push(c);
    }
    greedy_groups(&gram, &groups, k, candidate_cap)
}

fn finish(
    x: &Tensor,
    template: Template,
    cfg: &TemplateConfig,
    per_mode: Vec<Vec<usize>>,
    certs: Vec<Option<f64>>,
) -> Result<SelectionReport> {
    let selection = SelectionOperator::new(design_modes(x)?.to_vec(), per_mode)?;
    let eig = tensor_eig(x, &selection)?;
    Ok(SelectionReport {
        template,
        engine: cfg.cssp,
        selection,
        eig,
        sweeps: 1,
        per_mode_certificates: certs,
        initial_eig: None,
        eig_history: Vec::new(),
        sketch: None,
        seed: cfg.seed,
        warnings: Vec::new(),
    })
}

/// IndSelect: every mode is selected from the full tensor independently.
pub fn ind_select(x: &Tensor, cfg: &TemplateConfig) -> Result<SelectionReport> {
    let modes = design_modes(x)?;
    cfg.validate(modes)?;
    let d = modes.len();
    let mut per_mode = alloc::vec![Vec::new(); d];
    let mut certs = alloc::vec![None; d];
    for &j in &cfg.order {
        let (idx, cert) = mode_cssp(x, j, cfg.k[j], cfg.cssp)?;
        per_mode[j] = idx;
        certs[j] = cert;
    }
    finish(x, Template::Ind, cfg, per_mode, certs)
}

/// SeqSelect: modes are processed in order, each on the tensor already
/// reduced by the earlier selections.
pub fn seq_select(x: &Tensor, cfg: &TemplateConfig) -> Result<SelectionReport> {
    let modes = design_modes(x)?;
    cfg.validate(modes)?;
    let d = modes.len();
    let mut per_mode = alloc::vec![Vec::new(); d];
    let mut certs = alloc::vec![None; d];
    let mut work: Option<Tensor> = None;
    for &j in &cfg.order {
        let current = work.as_ref().unwrap_or(x);
        let (idx, cert) = mode_cssp(current, j, cfg.k[j], cfg.cssp)?;
        let next = if idx.len() == current.dims()[j] {
            None
        } else {
            Some(current.select_mode(j, &idx)?)
        };
        if let Some(t) = next {
            work = Some(t);
        }
        per_mode[j] = idx;
        certs[j] = cert;
    }
    finish(x, Template::Seq, cfg, per_mode, certs)
}

/// Seeded uniform initial design, one draw without replacement per mode.
pub fn random_initial_selection(mode_sizes: &[usize], k: &[usize], seed: u64) -> Result<SelectionOperator> {
    let mut rng = stream(seed, purpose::ITER_INIT);
    let per_mode = mode_sizes
        .iter()
        .zip(k)
        .map(|(&m, &kj)| sample(&mut rng, m, kj.min(m)).into_vec())
        .collect();
    SelectionOperator::new(mode_sizes.to_vec(), per_mode)
}

/// IterSelect: alternating reselection of each mode given the current
/// selections of all other modes, starting from a seeded random design.
///
/// A sweep is kept only if it does not lower the objective. Iteration stops
/// on a decrease, on a relative gain below `tol`, at a fixed point, or after
/// `max_sweeps` sweeps. With a single design mode the sweep does not depend on
/// the initialization and is always kept, so the result is the engine's.
pub fn iter_select(x: &Tensor, cfg: &TemplateConfig) -> Result<SelectionReport> {
    let modes = design_modes(x)?.to_vec();
    cfg.validate(&modes)?;
    let d = modes.len();
    let init = random_initial_selection(&modes, &cfg.k, cfg.seed)?;
    let initial_eig = tensor_eig(x, &init)?;
    let mut accepted = init;
    let mut accepted_eig = initial_eig;
    let mut accepted_certs = alloc::vec![None; d];
    let mut history = alloc::vec![initial_eig];
    let mut sweeps = 0;
    while sweeps < cfg.max_sweeps {
        sweeps += 1;
        let mut trial = accepted.clone();
        let mut certs = alloc::vec![None; d];
        for &j in &cfg.order {
            let reduced = x.apply_selection(&trial.with_mode(j, (0..modes[j]).collect())?)?;
            let (idx, cert) = mode_cssp(&reduced, j, cfg.k[j], cfg.cssp)?;
            trial = trial.with_mode(j, idx)?;
            certs[j] = cert;
        }
        let eig = tensor_eig(x, &trial)?;
        if (d > 1 || sweeps > 1) && eig < accepted_eig {
            break;
        }
        let fixed_point = trial == accepted;
        let small_gain = sweeps > 1 && (eig - accepted_eig).abs() < cfg.tol * accepted_eig.abs();
        accepted = trial;
        accepted_eig = eig;
        accepted_certs = certs;
        history.push(eig);
        if fixed_point || small_gain {
            break;
        }
    }
    Ok(SelectionReport {
        template: Template::Iter,
        engine: cfg.cssp,
        selection: accepted,
        eig: accepted_eig,
        sweeps,
        per_mode_certificates: accepted_certs,
        initial_eig: Some(initial_eig),
        eig_history: history,
        sketch: None,
        seed: cfg.seed,
        warnings: Vec::new(),
    })
}

pub fn run_template(x: &Tensor, cfg: &TemplateConfig, template: Template) -> Result<SelectionReport> {
    match template {
        Template::Ind => ind_select(x, cfg),
        Template::Seq => seq_select(x, cfg),
        Template::Iter => iter_select(x, cfg),
    }
}

/// Runs a template on the full matrix `A` of the given mode shape.
pub fn select_on_matrix(
    a: &Matrix,
    mode_sizes: &[usize],
    cfg: &TemplateConfig,
    template: Template,
) -> Result<SelectionReport> {
    let shape = ModeShape::new(mode_sizes.to_vec(), a.nrows())?;
    run_template(&matrix_to_tensor(a, &shape)?, cfg, template)
}

/// Deterministic pipeline on a problem: forms `A`, then runs `template`.
pub fn select_problem(p: &DesignProblem, cfg: &TemplateConfig, template: Template) -> Result<SelectionReport> {
    select_on_matrix(&p.build_a()?, p.mode_sizes(), cfg, template)
}

/// What Sketch-First compresses.
#[derive(Debug, Clone, Copy)]
pub enum SketchSource<'a> {
    /// An explicit `A` with its design modes.
    Matrix { a: &'a Matrix, mode_sizes: &'a [usize] },
    /// A problem whose sketch is formed from forward applications only.
    Problem(&'a DesignProblem),
}

/// Sketch-First: runs `template` on `Y = Ω A` with `Ω` an `r × N` Gaussian
/// matrix, `r = oversampling + Π k_j`.
///
/// For a problem source `Yᵀ = σ_R^{-1} F (Γ^{1/2} Ωᵀ)`, so no adjoint of `F`
/// is needed. The reported `eig` is recomputed on the full `A` whenever that
/// matrix can be formed.
pub fn sketch_first(
    source: SketchSource<'_>,
    cfg: &TemplateConfig,
    template: Template,
    oversampling: usize,
) -> Result<SelectionReport> {
    let (n, mode_sizes) = match source {
        SketchSource::Matrix { a, mode_sizes } => (a.nrows(), mode_sizes.to_vec()),
        SketchSource::Problem(p) => (p.parameter_dim(), p.mode_sizes().to_vec()),
    };
    cfg.validate(&mode_sizes)?;
    let r = oversampling + cfg.k.iter().product::<usize>();
    let omega = gaussian_sketch(r, n, cfg.seed);
    let y = match source {
        SketchSource::Matrix { a, .. } => {
            if a.ncols() != mode_sizes.iter().product::<usize>() {
                return Err(Error::DimensionMismatch {
                    context: "matrix columns vs mode sizes",
                    expected: mode_sizes.iter().product(),
                    found: a.ncols(),
                });
            }
            &omega * a
        }
        SketchSource::Problem(p) => {
            let z = &p.prior_sqrt * omega.transpose();
            (p.forward.apply(&z) / p.noise_sigma).transpose()
        }
    };
    let shape = ModeShape::new(mode_sizes.clone(), r)?;
    let mut report = run_template(&matrix_to_tensor(&y, &shape)?, cfg, template)?;
    let sketched_eig = report.eig;
    let full_eig = match source {
        SketchSource::Matrix { a, .. } => Some(crate::oed::subsampled_eig(a, &report.selection)?),
        SketchSource::Problem(p) => match &p.forward {
            Forward::Dense(_) => Some(selected_eig(p, &report.selection)?),
            Forward::Operator(_) => None,
        },
    };
    if r > n {
        report
            .warnings
            .push(format!("sketch has {r} rows but the parameter dimension is only {n}"));
    }
    if full_eig.is_none() {
        report
            .warnings
            .push("forward operator is not materialized; eig is the sketched objective".into());
    }
    report.eig = full_eig.unwrap_or(sketched_eig);
    report.sketch = Some(SketchInfo {
        rows: r,
        oversampling,
        sketched_eig,
        eig_is_sketched: full_eig.is_none(),
    });
    Ok(report)
}

/// `Ψ(A S)` from the selected rows of a dense forward matrix.
pub fn selected_eig(p: &DesignProblem, sel: &SelectionOperator) -> Result<f64> {
    let rows = p.forward_rows(sel)?;
    psi(&(&p.prior_sqrt * rows.transpose() / p.noise_sigma))
}
