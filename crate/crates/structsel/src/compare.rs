//! Method comparison against random or exhaustive design baselines.

use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;
use structsel_core::bench::{
    evaluate_range, exhaustive_result, exhaustive_space, random_designs, DesignDistribution, DesignEvaluator,
    ExhaustiveResult,
};
use structsel_core::cssp::CsspMethod;
use structsel_core::oed::DesignProblem;
use structsel_core::select::{select_problem, sketch_first, SelectionReport, SketchSource, Template, TemplateConfig};
use structsel_core::{Matrix, SelectionOperator};

use crate::error::{Error, Result};

/// One method to run: template, engine and whether to sketch first.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MethodSpec {
    pub template: Template,
    pub engine: CsspMethod,
    pub sketch: bool,
}

pub fn parse_engine(s: &str) -> Option<CsspMethod> {
    match s {
        "gks" => Some(CsspMethod::Gks),
        "deim" => Some(CsspMethod::Deim),
        "greedy" => Some(CsspMethod::greedy()),
        _ => None,
    }
}

impl FromStr for MethodSpec {
    type Err = Error;

    /// `template[:engine][:sketch]`, e.g. `iter:greedy:sketch`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Usage(format!("bad method {s:?}; expected template[:engine][:sketch]"));
        let mut parts = s.trim().split(':');
        let template = parts.next().and_then(Template::parse).ok_or_else(bad)?;
        let mut spec = MethodSpec {
            template,
            engine: CsspMethod::Gks,
            sketch: false,
        };
        for part in parts {
            match part {
                "sketch" => spec.sketch = true,
                other => spec.engine = parse_engine(other).ok_or_else(bad)?,
            }
        }
        Ok(spec)
    }
}

impl MethodSpec {
    pub fn label(&self) -> String {
        let mut s = format!("{}:{}", self.template.name(), self.engine.name());
        if self.sketch {
            s.push_str(":sketch");
        }
        s
    }

    pub fn display_name(&self) -> String {
        let t = match self.template {
            Template::Ind => "IndSelect",
            Template::Seq => "SeqSelect",
            Template::Iter => "IterSelect",
        };
        let prefix = if self.sketch { "Sketch-First " } else { "" };
        format!("{prefix}{t} ({})", self.engine.name())
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CompareConfig {
    pub k: Vec<usize>,
    /// Zero-based mode order; empty means natural order.
    pub order: Vec<usize>,
    pub methods: Vec<MethodSpec>,
    pub random: usize,
    pub exhaustive: bool,
    pub budget: u128,
    pub seed: u64,
    pub oversampling: usize,
    pub tol: f64,
    pub max_sweeps: usize,
}

impl CompareConfig {
    pub fn template_config(&self, engine: CsspMethod) -> TemplateConfig {
        let mut cfg = TemplateConfig::new(self.k.clone(), engine).with_seed(self.seed);
        if !self.order.is_empty() {
            cfg = cfg.with_order(self.order.clone());
        }
        cfg.tol = self.tol;
        cfg.max_sweeps = self.max_sweeps;
        cfg
    }
}

#[derive(Debug, Clone)]
pub struct ComparisonRow {
    pub spec: MethodSpec,
    pub eig: Option<f64>,
    /// `None` without a baseline or for failed runs.
    pub percentile: Option<f64>,
    pub sweeps: Option<usize>,
    pub seed: u64,
    pub error: Option<String>,
    pub wall_time_s: f64,
    pub report: Option<SelectionReport>,
}

#[derive(Debug, Clone)]
pub struct Comparison {
    pub rows: Vec<ComparisonRow>,
    pub baseline: Option<DesignDistribution>,
    pub exhaustive_best: Option<SelectionOperator>,
}

/// Runs one method, timing the selection call (forming `A` included for
/// the deterministic pipeline, forming the sketch for Sketch-First).
pub fn run_method(
    p: &DesignProblem,
    spec: MethodSpec,
    cfg: &TemplateConfig,
    oversampling: usize,
) -> (structsel_core::Result<SelectionReport>, f64) {
    let start = Instant::now();
    let out = if spec.sketch {
        sketch_first(SketchSource::Problem(p), cfg, spec.template, oversampling)
    } else {
        select_problem(p, cfg, spec.template)
    };
    (out, start.elapsed().as_secs_f64())
}

const CHUNK: u128 = 4096;

/// Exhaustive search with designs evaluated in parallel chunks; the result
/// does not depend on the number of worker threads.
pub fn parallel_exhaustive(a: &Matrix, mode_sizes: &[usize], k: &[usize], budget: u128) -> Result<ExhaustiveResult> {
    let space = exhaustive_space(mode_sizes, k, budget)?;
    let eval = DesignEvaluator::new(a, mode_sizes, k.iter().product())?;
    let chunks: Vec<u128> = (0..space.len().div_ceil(CHUNK)).collect();
    let parts = chunks
        .par_iter()
        .map(|&c| evaluate_range(&eval, &space, c * CHUNK..((c + 1) * CHUNK).min(space.len())))
        .collect::<structsel_core::Result<Vec<_>>>()?;
    Ok(exhaustive_result(&space, parts.concat())?)
}

/// Seeded random designs (drawn sequentially) evaluated in parallel.
pub fn parallel_random_distribution(
    eval: &DesignEvaluator,
    mode_sizes: &[usize],
    k: &[usize],
    count: usize,
    seed: u64,
) -> Result<DesignDistribution> {
    let designs = random_designs(mode_sizes, k, count, seed)?;
    let values = designs
        .par_iter()
        .map(|s| eval.evaluate(s))
        .collect::<structsel_core::Result<Vec<_>>>()?;
    Ok(DesignDistribution {
        values,
        designs: Some(designs),
        exhaustive: false,
        seed: Some(seed),
    })
}

/// Runs every method and ranks it against the baseline. Failing methods
/// become rows with an error message.
pub fn compare_methods(p: &DesignProblem, cfg: &CompareConfig) -> Result<Comparison> {
    let a = p.build_a()?;
    let ms = p.mode_sizes().to_vec();
    let eval = DesignEvaluator::new(&a, &ms, cfg.k.iter().product())?;
    let mut exhaustive_best = None;
    let baseline = if cfg.exhaustive {
        let r = parallel_exhaustive(&a, &ms, &cfg.k, cfg.budget)?;
        exhaustive_best = Some(r.best);
        Some(r.distribution)
    } else if cfg.random > 0 {
        Some(parallel_random_distribution(&eval, &ms, &cfg.k, cfg.random, cfg.seed)?)
    } else {
        None
    };
    let mut rows = Vec::with_capacity(cfg.methods.len());
    for &spec in &cfg.methods {
        let tcfg = cfg.template_config(spec.engine);
        let (out, secs) = run_method(p, spec, &tcfg, cfg.oversampling);
        let row = match out {
            Ok(report) => {
                let percentile = match &baseline {
                    Some(dist) => dist.percentile_of(eval.evaluate(&report.selection)?),
                    None => None,
                };
                ComparisonRow {
                    spec,
                    eig: Some(report.eig),
                    percentile,
                    sweeps: Some(report.sweeps),
                    seed: cfg.seed,
                    error: None,
                    wall_time_s: secs,
                    report: Some(report),
                }
            }
            Err(e) => ComparisonRow {
                spec,
                eig: None,
                percentile: None,
                sweeps: None,
                seed: cfg.seed,
                error: Some(e.to_string()),
                wall_time_s: secs,
                report: None,
            },
        };
        rows.push(row);
    }
    rows.sort_by(|x, y| match (x.eig, y.eig) {
        (Some(a), Some(b)) => b.total_cmp(&a),
        (Some(_), None) => std::cmp::Ordering::Less,
        (None, Some(_)) => std::cmp::Ordering::Greater,
        (None, None) => std::cmp::Ordering::Equal,
    });
    Ok(Comparison {
        rows,
        baseline,
        exhaustive_best,
    })
}

pub const COMPARISON_HEADER: [&str; 7] = ["method", "name", "eig", "percentile", "sweeps", "seed", "status"];

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map_or_else(String::new, |x| x.to_string())
}

/// Writes the comparison table. Wall times are kept out of this file so
/// reruns are byte-identical.
pub fn write_comparison_csv(path: &Path, cmp: &Comparison) -> Result<()> {
    let wrap = |e| Error::Csv {
        path: path.into(),
        source: e,
    };
    let mut w = csv::Writer::from_path(path).map_err(wrap)?;
    w.write_record(COMPARISON_HEADER).map_err(wrap)?;
    for r in &cmp.rows {
        let status = match (&r.error, r.percentile) {
            (Some(e), _) => format!("error: {e}"),
            (None, None) => "no_baseline".into(),
            (None, Some(_)) => "ok".into(),
        };
        w.write_record([
            r.spec.label(),
            r.spec.display_name(),
            opt(r.eig),
            opt(r.percentile),
            opt(r.sweeps),
            r.seed.to_string(),
            status,
        ])
        .map_err(wrap)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// One baseline objective value per line under an `eig` header.
pub fn write_histogram_csv(path: &Path, values: &[f64]) -> Result<()> {
    let wrap = |e| Error::Csv {
        path: path.into(),
        source: e,
    };
    let mut w = csv::Writer::from_path(path).map_err(wrap)?;
    w.write_record(["eig"]).map_err(wrap)?;
    for v in values {
        w.write_record([v.to_string()]).map_err(wrap)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn summary_table(cmp: &Comparison) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{:<34} {:>14} {:>11} {:>7}",
        "method", "eig", "percentile", "sweeps"
    );
    for r in &cmp.rows {
        match &r.error {
            Some(e) => {
                let _ = writeln!(out, "{:<34} failed: {e}", r.spec.display_name());
            }
            None => {
                let pct = r.percentile.map_or_else(|| "n/a".to_string(), |p| format!("{p:.2}"));
                let _ = writeln!(
                    out,
                    "{:<34} {:>14.6} {:>11} {:>7}",
                    r.spec.display_name(),
                    r.eig.unwrap_or(f64::NAN),
                    pct,
                    r.sweeps.unwrap_or(0)
                );
            }
        }
    }
    if let Some(d) = &cmp.baseline {
        let kind = if d.exhaustive { "exhaustive" } else { "random" };
        let _ = writeln!(
            out,
            "baseline: {} {kind} designs, max eig {:.6}",
            d.values.len(),
            d.max().unwrap_or(f64::NAN)
        );
    }
    out
}
