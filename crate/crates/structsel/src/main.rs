use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde_json::json;
use structsel_core::bench::DEFAULT_BUDGET;
use structsel_core::linalg::psi;
use structsel_core::oed::{
    heat_problem, lowrank_problem, posterior_mean, relative_error, tomo_problem, DesignProblem, HeatConfig,
    LowRankConfig, TomoConfig,
};
use structsel_core::select::{select_problem, sketch_first, SketchSource, Template, TemplateConfig};
use structsel_core::SelectionOperator;

use structsel::compare::{
    compare_methods, parse_engine, summary_table, write_comparison_csv, write_histogram_csv, CompareConfig, MethodSpec,
};
use structsel::manifest::Manifest;
use structsel::problem_io::{load_problem, save_problem, HEADER_FILE, PAYLOAD_FILE};
use structsel::report::{read_report, write_report, REPORT_FILE};
use structsel::{Error, Result};

#[derive(Parser)]
#[command(
    name = "structsel",
    version,
    about = "Structured sensor selection for Bayesian inverse problems"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic problem.
    Generate {
        #[command(subcommand)]
        kind: GenerateKind,
    },
    /// Select a structured design.
    Select(SelectArgs),
    /// Compare methods against random or exhaustive baselines.
    Compare(CompareArgs),
    /// Posterior-mean reconstruction under a selected design.
    Reconstruct(ReconstructArgs),
}

#[derive(Args, Clone)]
struct Common {
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Subcommand)]
enum GenerateKind {
    /// 1-D heat equation, initial-condition inversion.
    Heat {
        #[arg(long, default_value_t = 401)]
        dof: usize,
        #[arg(long, default_value_t = 28)]
        sensors: usize,
        #[arg(long, default_value_t = 10)]
        snapshots: usize,
        #[arg(long, default_value_t = 3f64.sqrt())]
        kappa: f64,
        #[arg(long, default_value_t = 4e-3)]
        dt: f64,
        #[arg(long, default_value_t = 0.1)]
        gamma: f64,
        #[arg(long, default_value_t = 0.02)]
        noise: f64,
        #[command(flatten)]
        common: Common,
    },
    /// Straight-ray tomography on the unit square.
    Tomo {
        #[arg(long, default_value_t = 32)]
        grid: usize,
        #[arg(long, default_value_t = 16)]
        sources: usize,
        #[arg(long, default_value_t = 20)]
        receivers: usize,
        #[arg(long, default_value_t = 0.12)]
        length_scale: f64,
        #[arg(long, default_value_t = 1.0)]
        variance: f64,
        #[arg(long, default_value_t = 0.02)]
        noise: f64,
        #[command(flatten)]
        common: Common,
    },
    /// Synthetic problem with a prescribed spectrum.
    Lowrank {
        #[arg(long, default_value_t = 60)]
        n: usize,
        /// Mode sizes, comma separated.
        #[arg(long, value_delimiter = ',', default_value = "8,10")]
        modes: Vec<usize>,
        #[arg(long, default_value_t = 10)]
        rank: usize,
        #[arg(long, default_value_t = 0.8)]
        decay: f64,
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Args)]
struct TemplateArgs {
    /// Per-mode counts, comma separated.
    #[arg(long, value_delimiter = ',', required = true)]
    k: Vec<usize>,
    /// Mode processing order, 1-based and comma separated.
    #[arg(long, value_delimiter = ',')]
    order: Vec<usize>,
    #[arg(long, default_value_t = 10)]
    oversample: usize,
    #[arg(long, default_value_t = 1e-10)]
    tol: f64,
    #[arg(long, default_value_t = 20)]
    max_sweeps: usize,
}

#[derive(Args)]
struct SelectArgs {
    #[arg(long)]
    problem: PathBuf,
    #[arg(long, default_value = "ind")]
    method: String,
    #[arg(long, default_value = "gks")]
    engine: String,
    #[arg(long)]
    sketch: bool,
    #[command(flatten)]
    template: TemplateArgs,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct CompareArgs {
    #[arg(long)]
    problem: PathBuf,
    /// Methods as template[:engine][:sketch], comma separated.
    #[arg(long, value_delimiter = ',', default_value = "ind:gks,seq:gks,iter:gks")]
    methods: Vec<String>,
    /// Number of random baseline designs.
    #[arg(long, default_value_t = 0)]
    random: usize,
    /// Enumerate every design as the baseline.
    #[arg(long)]
    exhaustive: bool,
    /// Largest design count an exhaustive run may visit.
    #[arg(long, default_value_t = DEFAULT_BUDGET)]
    budget: u128,
    /// Worker threads for baseline evaluation (0 = all cores).
    #[arg(long, default_value_t = 0)]
    threads: usize,
    #[command(flatten)]
    template: TemplateArgs,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct ReconstructArgs {
    #[arg(long)]
    problem: PathBuf,
    /// Report JSON from `select` (file or its directory).
    #[arg(long)]
    selection: PathBuf,
    #[arg(long)]
    out: PathBuf,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Generate { kind } => cmd_generate(kind),
        Command::Select(args) => cmd_select(args),
        Command::Compare(args) => cmd_compare(args),
        Command::Reconstruct(args) => cmd_reconstruct(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn create_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

fn cmd_generate(kind: GenerateKind) -> Result<()> {
    let start = Instant::now();
    let (problem, common, config) = match kind {
        GenerateKind::Heat {
            dof,
            sensors,
            snapshots,
            kappa,
            dt,
            gamma,
            noise,
            common,
        } => {
            let cfg = HeatConfig {
                dof,
                kappa,
                dt,
                snapshots,
                sensors,
                gamma,
                noise_level: noise,
            };
            (heat_problem(&cfg, common.seed)?, common, json!(cfg))
        }
        GenerateKind::Tomo {
            grid,
            sources,
            receivers,
            length_scale,
            variance,
            noise,
            common,
        } => {
            let cfg = TomoConfig {
                grid,
                sources,
                receivers,
                length_scale,
                variance,
                noise_level: noise,
                ..TomoConfig::default()
            };
            (tomo_problem(&cfg, common.seed)?, common, json!(cfg))
        }
        GenerateKind::Lowrank {
            n,
            modes,
            rank,
            decay,
            common,
        } => {
            if rank == 0 {
                return Err(Error::Usage("--rank must be at least 1".into()));
            }
            let cfg = LowRankConfig {
                n,
                mode_sizes: modes,
                rank,
                decay,
            };
            (lowrank_problem(&cfg, common.seed)?, common, json!(cfg))
        }
    };
    let mut manifest = Manifest::start("generate", config, common.seed);
    manifest
        .timings
        .push(("generate".into(), start.elapsed().as_secs_f64()));
    save_problem(&common.out, &problem)?;
    manifest.outputs = vec![HEADER_FILE.into(), PAYLOAD_FILE.into()];
    let dims: Vec<String> = problem
        .mode_sizes()
        .iter()
        .chain([problem.parameter_dim()].iter())
        .map(|d| d.to_string())
        .collect();
    println!("{} problem: tensor {}", problem.generator.kind(), dims.join("x"));
    if problem.is_materializable() {
        println!("psi(A) = {}", psi(&problem.build_a()?)?);
    }
    manifest.finish(&common.out)
}

fn template_config(args: &TemplateArgs, engine: &str, seed: u64, d: usize) -> Result<TemplateConfig> {
    let engine = parse_engine(engine).ok_or_else(|| Error::Usage(format!("unknown engine {engine:?}")))?;
    let mut cfg = TemplateConfig::new(args.k.clone(), engine).with_seed(seed);
    if args.k.len() != d {
        return Err(Error::Usage(format!("--k needs {d} counts, got {}", args.k.len())));
    }
    if !args.order.is_empty() {
        if args.order.contains(&0) {
            return Err(Error::Usage("--order is 1-based".into()));
        }
        cfg = cfg.with_order(args.order.iter().map(|j| j - 1).collect());
    }
    cfg.tol = args.tol;
    cfg.max_sweeps = args.max_sweeps;
    Ok(cfg)
}

fn cmd_select(args: SelectArgs) -> Result<()> {
    let problem = load_problem(&args.problem)?;
    let template =
        Template::parse(&args.method).ok_or_else(|| Error::Usage(format!("unknown method {:?}", args.method)))?;
    let cfg = template_config(
        &args.template,
        &args.engine,
        args.common.seed,
        problem.mode_sizes().len(),
    )?;
    let start = Instant::now();
    let report = if args.sketch {
        sketch_first(
            SketchSource::Problem(&problem),
            &cfg,
            template,
            args.template.oversample,
        )?
    } else {
        select_problem(&problem, &cfg, template)?
    };
    let secs = start.elapsed().as_secs_f64();
    let mut manifest = Manifest::start(
        "select",
        json!({
            "method": template,
            "sketch": args.sketch,
            "oversample": args.template.oversample,
            "template": cfg,
        }),
        args.common.seed,
    );
    manifest.inputs.push(args.problem.display().to_string());
    manifest.timings.push(("select".into(), secs));
    create_dir(&args.common.out)?;
    write_report(&args.common.out.join(REPORT_FILE), &report)?;
    manifest.outputs.push(REPORT_FILE.into());
    for (j, idx) in report.selection.per_mode().iter().enumerate() {
        println!("mode {}: {:?}", j + 1, idx);
    }
    println!("eig = {}  sweeps = {}", report.eig, report.sweeps);
    for w in &report.warnings {
        eprintln!("warning: {w}");
    }
    manifest.finish(&args.common.out)
}

fn cmd_compare(args: CompareArgs) -> Result<()> {
    let problem = load_problem(&args.problem)?;
    let methods = args
        .methods
        .iter()
        .map(|m| m.parse::<MethodSpec>())
        .collect::<Result<Vec<_>>>()?;
    // Validates --k and --order the same way `select` does.
    let tcfg = template_config(&args.template, "gks", args.common.seed, problem.mode_sizes().len())?;
    let cfg = CompareConfig {
        k: tcfg.k.clone(),
        order: tcfg.order.clone(),
        methods,
        random: args.random,
        exhaustive: args.exhaustive,
        budget: args.budget,
        seed: args.common.seed,
        oversampling: args.template.oversample,
        tol: tcfg.tol,
        max_sweeps: tcfg.max_sweeps,
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(args.threads)
        .build()
        .map_err(|e| Error::Usage(format!("thread pool: {e}")))?;
    let mut manifest = Manifest::start("compare", json!({ "compare": cfg, "threads": args.threads }), cfg.seed);
    manifest.inputs.push(args.problem.display().to_string());
    let start = Instant::now();
    let cmp = pool.install(|| compare_methods(&problem, &cfg))?;
    manifest.timings.push(("compare".into(), start.elapsed().as_secs_f64()));
    for r in &cmp.rows {
        manifest.timings.push((r.spec.label(), r.wall_time_s));
    }
    create_dir(&args.common.out)?;
    write_comparison_csv(&args.common.out.join("comparison.csv"), &cmp)?;
    manifest.outputs.push("comparison.csv".into());
    if let Some(d) = &cmp.baseline {
        write_histogram_csv(&args.common.out.join("histogram.csv"), &d.values)?;
        manifest.outputs.push("histogram.csv".into());
    }
    print!("{}", summary_table(&cmp));
    manifest.finish(&args.common.out)
}

fn cmd_reconstruct(args: ReconstructArgs) -> Result<()> {
    let problem: DesignProblem = load_problem(&args.problem)?;
    let report = read_report(&args.selection)?;
    let (Some(u_true), Some(data)) = (&problem.u_true, &problem.data) else {
        return Err(Error::Core(structsel_core::Error::MissingData(
            "problem has no true parameter and data",
        )));
    };
    let start = Instant::now();
    let full = SelectionOperator::identity(problem.mode_sizes());
    let u_sel = posterior_mean(&problem, &report.selection, data)?;
    let u_full = posterior_mean(&problem, &full, data)?;
    let e_sel = relative_error(&u_sel, u_true);
    let e_full = relative_error(&u_full, u_true);
    let mut manifest = Manifest::start("reconstruct", json!({ "selection": report.selection }), problem.seed);
    manifest.inputs.push(args.problem.display().to_string());
    manifest.inputs.push(args.selection.display().to_string());
    manifest
        .timings
        .push(("reconstruct".into(), start.elapsed().as_secs_f64()));
    create_dir(&args.out)?;
    let path = args.out.join("reconstruction.csv");
    let wrap = |e| Error::Csv {
        path: path.clone(),
        source: e,
    };
    let mut w = csv::Writer::from_path(&path).map_err(wrap)?;
    w.write_record(["index", "u_true", "u_selected", "u_full"])
        .map_err(wrap)?;
    for i in 0..u_true.len() {
        w.write_record([
            i.to_string(),
            u_true[i].to_string(),
            u_sel[i].to_string(),
            u_full[i].to_string(),
        ])
        .map_err(wrap)?;
    }
    w.flush().map_err(|e| Error::io(&path, e))?;
    structsel::json::write_json(
        &args.out.join("errors.json"),
        &json!({ "selected_error": e_sel, "full_error": e_full, "ratio": e_sel / e_full }),
    )?;
    manifest.outputs = vec!["reconstruction.csv".into(), "errors.json".into()];
    println!(
        "relative error: selected {e_sel:.6}, full data {e_full:.6}, ratio {:.4}",
        e_sel / e_full
    );
    manifest.finish(&args.out)
}
