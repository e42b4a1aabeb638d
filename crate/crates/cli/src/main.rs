//! `mg`: estimation, inference and experiments from the command line.
//!
//! Exit codes: 0 success, 2 usage or parse error, 3 insufficient data,
//! 4 invalid parameter, 5 internal assertion.

use std::fs;
use std::io::{BufReader, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use mg_core::distributions::{DEFAULT_REGULARITY_GRID, DEFAULT_REGULARITY_TOL};
use mg_core::estimator::{default_grid, default_interval, DEFAULT_GRID_POINTS};
use mg_core::inference::{confidence_interval, CHERNOFF_NORMAL_SD};
use mg_core::montecarlo::{
    run_coverage_experiment, run_coverage_experiment_with_threads, run_rate_experiment,
    run_rate_experiment_with_threads, McConfig, DEFAULT_SUP_POINTS,
};
use mg_core::{io, minimax, ChernoffApprox, DistributionSpec, Error, Estimator, Family, ValueSample};

#[derive(Debug, Parser)]
#[command(name = "mg", version, about = "Tuning-free density estimation for auction valuations")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Estimate the valuation density on a grid.
    Estimate(EstimateArgs),
    /// Confidence interval for the density at one point.
    Infer(InferArgs),
    /// Draw a sample from an analytic distribution.
    Simulate(SimulateArgs),
    /// Monte Carlo error statistics and log-log rate across sample sizes.
    Rate(ExperimentArgs),
    /// Monte Carlo coverage of the confidence interval.
    Coverage(ExperimentArgs),
    /// Verify the two-point lower-bound construction for a sample size.
    Minimax(MinimaxArgs),
    /// Check Myerson regularity of an analytic distribution.
    Regularity(RegularityArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum FamilyName {
    Uniform,
    TruncExp,
    PerturbedUniform,
    GapMixture,
}

#[derive(Debug, Args)]
struct DistArgs {
    /// Distribution family.
    #[arg(long, value_enum, conflicts_with = "spec")]
    family: Option<FamilyName>,
    /// Distribution as JSON, e.g. '{"family": "perturbed_uniform", "delta": 0.1}'.
    #[arg(long)]
    spec: Option<String>,
    #[arg(long, default_value_t = 0.0)]
    lo: f64,
    #[arg(long, default_value_t = 1.0)]
    hi: f64,
    #[arg(long, default_value_t = 1.0)]
    rate: f64,
    #[arg(long)]
    delta: Option<f64>,
    #[arg(long, default_value_t = 0.5)]
    w: f64,
    #[arg(long, default_value_t = 0.0)]
    lo1: f64,
    #[arg(long, default_value_t = 0.1)]
    hi1: f64,
    #[arg(long, default_value_t = 0.9)]
    lo2: f64,
    #[arg(long, default_value_t = 1.0)]
    hi2: f64,
}

#[derive(Debug, Args)]
struct EstimateArgs {
    /// CSV file with one value per line (optional "value" header).
    input: PathBuf,
    #[arg(long)]
    a: Option<f64>,
    #[arg(long)]
    b: Option<f64>,
    #[arg(long, default_value_t = DEFAULT_GRID_POINTS)]
    grid_points: usize,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// Output file; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct InferArgs {
    input: PathBuf,
    #[arg(long)]
    v: f64,
    #[arg(long, default_value_t = 0.95)]
    level: f64,
    /// JSON array of {"p": .., "q": ..} Chernoff quantiles.
    #[arg(long)]
    quantile_table: Option<PathBuf>,
    #[arg(long, default_value_t = CHERNOFF_NORMAL_SD)]
    sd: f64,
    #[arg(long)]
    a: Option<f64>,
    #[arg(long)]
    b: Option<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct SimulateArgs {
    #[command(flatten)]
    dist: DistArgs,
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct ExperimentArgs {
    /// Full McConfig as a JSON file; overrides the flags below.
    #[arg(long)]
    config: Option<PathBuf>,
    #[command(flatten)]
    dist: DistArgs,
    #[arg(long, default_value_t = 0.5)]
    v: f64,
    #[arg(long, value_delimiter = ',', default_values_t = vec![500usize, 2000, 8000, 32000])]
    n_grid: Vec<usize>,
    #[arg(long, default_value_t = 200)]
    reps: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 0.95)]
    level: f64,
    #[arg(long, default_value_t = 0.05)]
    a: f64,
    #[arg(long, default_value_t = 0.95)]
    b: f64,
    /// Range of the sup-error grid, as "lo,hi".
    #[arg(long, value_delimiter = ',', num_args = 2)]
    sup_interval: Option<Vec<f64>>,
    /// Worker threads; also read from MG_THREADS.
    #[arg(long, env = "MG_THREADS")]
    threads: Option<usize>,
    /// JSON report output; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Per-n summary CSV.
    #[arg(long)]
    csv: Option<PathBuf>,
    /// Per-replication CSV.
    #[arg(long)]
    reps_csv: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct MinimaxArgs {
    #[arg(long)]
    n: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct RegularityArgs {
    #[command(flatten)]
    dist: DistArgs,
    #[arg(long, default_value_t = DEFAULT_REGULARITY_GRID)]
    grid_size: usize,
    #[arg(long, default_value_t = DEFAULT_REGULARITY_TOL)]
    tol: f64,
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Failure with its exit code.
#[derive(Debug)]
struct Failure {
    code: u8,
    msg: String,
}

impl Failure {
    fn usage(msg: impl Into<String>) -> Self {
        Self { code: 2, msg: msg.into() }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Parse { .. } => 2,
            Error::InsufficientData { .. } | Error::Degenerate(_) => 3,
            Error::Domain { .. }
            | Error::ZeroDensity(_)
            | Error::InvalidParameter(_)
            | Error::InvalidInterval { .. }
            | Error::RegularityViolated(_)
            | Error::WindowCollapsed { .. } => 4,
            Error::Experiment { .. } | Error::Certificate(_) => 5,
        };
        Self { code, msg: e.to_string() }
    }
}

type CmdResult = Result<(), Failure>;

impl DistArgs {
    fn resolve(&self) -> Result<DistributionSpec, Failure> {
        if let Some(json) = &self.spec {
            let family: Family =
                serde_json::from_str(json).map_err(|e| Failure::usage(format!("--spec: {e}")))?;
            return Ok(DistributionSpec::new(family)?);
        }
        let family = match self.family.unwrap_or(FamilyName::Uniform) {
            FamilyName::Uniform => Family::Uniform { lo: self.lo, hi: self.hi },
            FamilyName::TruncExp => Family::TruncExp { rate: self.rate, lo: self.lo, hi: self.hi },
            FamilyName::PerturbedUniform => Family::PerturbedUniform {
                delta: self
                    .delta
                    .ok_or_else(|| Failure::usage("--delta is required for perturbed_uniform"))?,
            },
            FamilyName::GapMixture => Family::GapMixture {
                w: self.w,
                lo1: self.lo1,
                hi1: self.hi1,
                lo2: self.lo2,
                hi2: self.hi2,
            },
        };
        Ok(DistributionSpec::new(family)?)
    }
}

fn read_sample(path: &Path) -> Result<ValueSample, Failure> {
    let file = fs::File::open(path)
        .map_err(|e| Failure::usage(format!("cannot open {}: {e}", path.display())))?;
    Ok(ValueSample::from_csv(BufReader::new(file))?)
}

fn check_output_dir(path: &Option<PathBuf>) -> CmdResult {
    if let Some(p) = path {
        let parent = p.parent().filter(|d| !d.as_os_str().is_empty());
        if let Some(dir) = parent {
            if !dir.is_dir() {
                return Err(Failure::usage(format!("output directory {} does not exist", dir.display())));
            }
        }
    }
    Ok(())
}

fn emit(path: &Option<PathBuf>, text: &str) -> CmdResult {
    match path {
        Some(p) => fs::write(p, text)
            .map_err(|e| Failure { code: 2, msg: format!("cannot write {}: {e}", p.display()) }),
        None => std::io::stdout()
            .write_all(text.as_bytes())
            .map_err(|e| Failure { code: 2, msg: e.to_string() }),
    }
}

fn to_json<T: Serialize>(value: &T) -> Result<String, Failure> {
    let mut s = serde_json::to_string_pretty(value)
        .map_err(|e| Failure { code: 5, msg: e.to_string() })?;
    s.push('\n');
    Ok(s)
}

fn resolve_interval(sample: &ValueSample, a: Option<f64>, b: Option<f64>) -> Result<(f64, f64), Failure> {
    if sample.len() < 3 {
        return Err(Error::InsufficientData { needed: 3, got: sample.len() }.into());
    }
    if sample.min() == sample.max() {
        return Err(Error::Degenerate("all observations are identical").into());
    }
    let (da, db) = default_interval(sample);
    let (a, b) = (a.unwrap_or(da), b.unwrap_or(db));
    if a >= b || a.is_nan() || b.is_nan() {
        return Err(Failure { code: 4, msg: format!("invalid interval [{a}, {b}]") });
    }
    Ok((a, b))
}

fn cmd_estimate(args: EstimateArgs) -> CmdResult {
    check_output_dir(&args.out)?;
    let sample = read_sample(&args.input)?;
    let (a, b) = resolve_interval(&sample, args.a, args.b)?;
    if args.grid_points == 0 {
        return Err(Failure { code: 4, msg: "--grid-points must be positive".into() });
    }
    let grid = default_grid(a, b, args.grid_points);
    let est = Estimator::fit(&sample, a, b)?.evaluate(&grid)?;
    let text = match args.format {
        Format::Csv => io::density_csv(&est),
        Format::Json => to_json(&est)?,
    };
    emit(&args.out, &text)
}

fn cmd_infer(args: InferArgs) -> CmdResult {
    check_output_dir(&args.out)?;
    let approx = match &args.quantile_table {
        Some(path) => {
            let text = fs::read_to_string(path)
                .map_err(|e| Failure::usage(format!("cannot read {}: {e}", path.display())))?;
            ChernoffApprox::from_table_json(&text).map_err(|e| Failure::usage(e.to_string()))?
        }
        None => ChernoffApprox::normal(args.sd)?,
    };
    let sample = read_sample(&args.input)?;
    let (a, b) = resolve_interval(&sample, args.a, args.b)?;
    let result = confidence_interval(&sample, args.v, args.level, &approx, a, b)?;
    emit(&args.out, &to_json(&result)?)
}

fn cmd_simulate(args: SimulateArgs) -> CmdResult {
    check_output_dir(&args.out)?;
    let spec = args.dist.resolve()?;
    if args.n == 0 {
        return Err(Failure { code: 4, msg: "--n must be positive".into() });
    }
    emit(&args.out, &io::values_csv(&spec.draw_seeded(args.n, args.seed)))
}

fn experiment_config(args: &ExperimentArgs) -> Result<McConfig, Failure> {
    if let Some(path) = &args.config {
        let text = fs::read_to_string(path)
            .map_err(|e| Failure::usage(format!("cannot read {}: {e}", path.display())))?;
        return serde_json::from_str(&text).map_err(|e| Failure::usage(format!("config: {e}")));
    }
    let sup_interval = args.sup_interval.as_ref().map(|v| (v[0], v[1]));
    Ok(McConfig {
        spec: args.dist.resolve()?,
        v: args.v,
        n_grid: args.n_grid.clone(),
        reps: args.reps,
        seed: args.seed,
        level: args.level,
        interval: (args.a, args.b),
        sup_interval,
        sup_points: DEFAULT_SUP_POINTS,
        approx: ChernoffApprox::default(),
    })
}

fn cmd_experiment(args: ExperimentArgs, coverage: bool) -> CmdResult {
    check_output_dir(&args.out)?;
    check_output_dir(&args.csv)?;
    check_output_dir(&args.reps_csv)?;
    let cfg = experiment_config(&args)?;
    let report = match (args.threads, coverage) {
        (Some(0), _) => return Err(Failure { code: 4, msg: "--threads must be positive".into() }),
        (Some(t), true) => run_coverage_experiment_with_threads(&cfg, t)?,
        (Some(t), false) => run_rate_experiment_with_threads(&cfg, t)?,
        (None, true) => run_coverage_experiment(&cfg)?,
        (None, false) => run_rate_experiment(&cfg)?,
    };
    if let Some(path) = &args.csv {
        emit(&Some(path.clone()), &io::rate_csv(&report))?;
    }
    if let Some(path) = &args.reps_csv {
        emit(&Some(path.clone()), &io::reps_csv(&report))?;
    }
    emit(&args.out, &to_json(&report)?)
}

fn cmd_minimax(args: MinimaxArgs) -> CmdResult {
    check_output_dir(&args.out)?;
    if args.n == 0 {
        return Err(Failure { code: 4, msg: "--n must be positive".into() });
    }
    let cert = minimax::build_certificate(args.n)?;
    emit(&args.out, &to_json(&cert)?)
}

fn cmd_regularity(args: RegularityArgs) -> CmdResult {
    check_output_dir(&args.out)?;
    let spec = args.dist.resolve()?;
    let report = spec.check_regularity(args.grid_size, args.tol)?;
    emit(&args.out, &to_json(&report)?)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Estimate(a) => cmd_estimate(a),
        Command::Infer(a) => cmd_infer(a),
        Command::Simulate(a) => cmd_simulate(a),
        Command::Rate(a) => cmd_experiment(a, false),
        Command::Coverage(a) => cmd_experiment(a, true),
        Command::Minimax(a) => cmd_minimax(a),
        Command::Regularity(a) => cmd_regularity(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("mg: {}", f.msg);
            ExitCode::from(f.code)
        }
    }
}
