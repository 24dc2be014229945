//! Command-line wiring: sources, distortions, solvers, simulators and
//! analysis as reproducible file-based runs.
//!
//! Exit codes: 0 success, 2 usage or validation failure, 3 non-convergence
//! under `--strict`. Parameters resolve as flags > config file > defaults;
//! the config file is flat `key = value` text keyed by long flag names.
//! Every output gets a JSON sidecar with the full parameter set and seed.

use std::collections::HashMap;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::analysis::{cyclic_align, hill_sweep, profile_summary};
use crate::apoptosis::{exp_source, hamming_like, rectified_squared, ApoptosisModel};
use crate::blahut::{baa_solve, default_lambda_grid, rd_curve, solve_for_distortion, BaaConfig};
use crate::ibaa::{ibaa_from_counts, roundtrip_validate};
use crate::io;
use crate::legi::{simulate_with_progress, LegiParams, SimConfig, SimMode, SimOutput};
use crate::probcore::{DistortionMatrix, JointDist, Pmf};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_NOT_CONVERGED: i32 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "ratelens",
    about = "Rate-distortion strategies, inverse distortion recovery, and LEGI chemotaxis simulation",
    version
)]
pub struct Cli {
    /// Flat key = value config file; flags override its entries.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Worker thread cap (default: RATELENS_THREADS env, then all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// RNG seed; drawn from system entropy and printed when absent.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Fail with exit code 3 if any solve does not converge.
    #[arg(long, global = true)]
    pub strict: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Trace the rate-distortion curve over a lambda grid.
    RdCurve(RdCurveArgs),
    /// Solve for one optimal strategy (by lambda or target distortion).
    RdStrategy(RdStrategyArgs),
    /// Recover a distortion matrix from an observation-count CSV.
    Ibaa(IbaaArgs),
    /// Run the LEGI chemotaxis Monte Carlo simulation.
    SimLegi(SimLegiArgs),
    /// Sample input-output pairs from a BAA-optimal apoptosis strategy.
    SimApoptosis(SimApoptosisArgs),
    /// Cyclically align a square sector distortion matrix.
    Align(AlignArgs),
    /// Simulate, recover and summarize profiles across Hill coefficients.
    HillSweep(HillSweepArgs),
    /// Generate-then-recover validation for the apoptosis distortions.
    Roundtrip(RoundtripArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelChoice {
    Apoptosis,
    File,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum DistortionChoice {
    Hamming,
    Squared,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ModeChoice {
    Sample,
    Accumulate,
}

impl From<ModeChoice> for SimMode {
    fn from(m: ModeChoice) -> Self {
        match m {
            ModeChoice::Sample => SimMode::Sample,
            ModeChoice::Accumulate => SimMode::Accumulate,
        }
    }
}

/// Apoptosis model parameters, shared by several subcommands.
#[derive(Debug, Args, Clone)]
pub struct ApoptosisFlags {
    #[arg(long)]
    pub gamma: Option<f64>,
    #[arg(long)]
    pub unit_scale: Option<f64>,
    #[arg(long)]
    pub x_max: Option<usize>,
    #[arg(long)]
    pub x_th: Option<usize>,
    #[arg(long)]
    pub squared_denominator: Option<f64>,
}

/// LEGI model parameters, shared by sim-legi and hill-sweep.
#[derive(Debug, Args, Clone)]
pub struct LegiFlags {
    #[arg(long)]
    pub a: Option<f64>,
    #[arg(long)]
    pub b: Option<f64>,
    #[arg(long)]
    pub k_d: Option<f64>,
    #[arg(long)]
    pub r_t: Option<u64>,
    #[arg(long)]
    pub sectors: Option<usize>,
}

#[derive(Debug, Args)]
pub struct RdCurveArgs {
    /// Source/distortion family: built-in apoptosis model or CSV files.
    #[arg(long, value_enum, default_value = "apoptosis")]
    pub model: ModelChoice,
    /// Which apoptosis distortion to use (ignored with --model file).
    #[arg(long, value_enum, default_value = "hamming")]
    pub distortion: DistortionChoice,
    /// Source pmf CSV (required with --model file).
    #[arg(long)]
    pub source_csv: Option<PathBuf>,
    /// Distortion matrix CSV (required with --model file).
    #[arg(long)]
    pub distortion_csv: Option<PathBuf>,
    /// Comma-separated lambda values; default 60-point geometric grid.
    #[arg(long, value_delimiter = ',')]
    pub lambda_grid: Option<Vec<f64>>,
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long)]
    pub max_iter: Option<usize>,
    #[command(flatten)]
    pub apoptosis: ApoptosisFlags,
    /// Output curve CSV path.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct RdStrategyArgs {
    #[arg(long, value_enum, default_value = "apoptosis")]
    pub model: ModelChoice,
    #[arg(long, value_enum, default_value = "hamming")]
    pub distortion: DistortionChoice,
    #[arg(long)]
    pub source_csv: Option<PathBuf>,
    #[arg(long)]
    pub distortion_csv: Option<PathBuf>,
    /// Lagrange multiplier of the solve.
    #[arg(long, conflicts_with = "target_distortion")]
    pub lambda: Option<f64>,
    /// Bisect lambda to hit this expected distortion instead.
    #[arg(long)]
    pub target_distortion: Option<f64>,
    /// Bisection tolerance on the target distortion.
    #[arg(long)]
    pub tol_distortion: Option<f64>,
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long)]
    pub max_iter: Option<usize>,
    #[command(flatten)]
    pub apoptosis: ApoptosisFlags,
    /// Output strategy CSV path.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct IbaaArgs {
    /// Observation counts CSV (matrix format, nonnegative integers).
    #[arg(long)]
    pub counts: PathBuf,
    /// Output distortion CSV path.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct SimLegiArgs {
    #[command(flatten)]
    pub legi: LegiFlags,
    #[arg(long)]
    pub hill: Option<u32>,
    #[arg(long)]
    pub trials: Option<u64>,
    #[arg(long, value_enum, default_value = "sample")]
    pub mode: ModeChoice,
    /// Output joint counts/weights CSV path.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct SimApoptosisArgs {
    #[command(flatten)]
    pub apoptosis: ApoptosisFlags,
    #[arg(long, value_enum, default_value = "hamming")]
    pub distortion: DistortionChoice,
    /// Lagrange multiplier of the generating strategy.
    #[arg(long)]
    pub lambda: Option<f64>,
    /// Number of (x, y) pairs to draw from the optimal joint.
    #[arg(long)]
    pub samples: Option<u64>,
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long)]
    pub max_iter: Option<usize>,
    /// Output counts CSV path.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct AlignArgs {
    /// Square sector distortion matrix CSV.
    #[arg(long)]
    pub distortion: PathBuf,
    /// Also emit one column per source row.
    #[arg(long)]
    pub include_rows: bool,
    /// Output profile CSV path.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct HillSweepArgs {
    #[command(flatten)]
    pub legi: LegiFlags,
    /// Comma-separated Hill coefficients.
    #[arg(long, value_delimiter = ',')]
    pub hills: Option<Vec<u32>>,
    #[arg(long)]
    pub trials: Option<u64>,
    #[arg(long, value_enum, default_value = "sample")]
    pub mode: ModeChoice,
    /// Output directory for per-h profiles and summaries.
    #[arg(long)]
    pub out_dir: PathBuf,
}

#[derive(Debug, Args)]
pub struct RoundtripArgs {
    #[command(flatten)]
    pub apoptosis: ApoptosisFlags,
    #[arg(long, value_enum, default_value = "hamming")]
    pub distortion: DistortionChoice,
    /// Lagrange multiplier of the generating solve.
    #[arg(long)]
    pub lambda: Option<f64>,
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long)]
    pub max_iter: Option<usize>,
    /// Output report JSON path.
    #[arg(long)]
    pub out: PathBuf,
}

/// Flat `key = value` config file; '#' starts a comment line.
#[derive(Debug, Default)]
pub struct ConfigFile {
    entries: HashMap<String, String>,
}

impl ConfigFile {
    pub fn load(path: &Path) -> Result<Self, String> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| format!("cannot read config file {}: {e}", path.display()))?;
        let mut entries = HashMap::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| format!("config line {}: expected 'key = value'", i + 1))?;
            entries.insert(key.trim().to_string(), value.trim().to_string());
        }
        Ok(Self { entries })
    }

    fn get<T: FromStr>(&self, key: &str) -> Result<Option<T>, String> {
        match self.entries.get(key) {
            None => Ok(None),
            Some(raw) => raw
                .parse()
                .map(Some)
                .map_err(|_| format!("config key '{key}': cannot parse '{raw}'")),
        }
    }
}

/// flag > config > default
fn resolve<T: FromStr + Copy>(
    flag: Option<T>,
    cfg: &ConfigFile,
    key: &str,
    default: T,
) -> Result<T, String> {
    Ok(flag.or(cfg.get(key)?).unwrap_or(default))
}

fn apoptosis_model(flags: &ApoptosisFlags, cfg: &ConfigFile) -> Result<ApoptosisModel, String> {
    let d = ApoptosisModel::default();
    let model = ApoptosisModel {
        gamma: resolve(flags.gamma, cfg, "gamma", d.gamma)?,
        unit_scale: resolve(flags.unit_scale, cfg, "unit-scale", d.unit_scale)?,
        x_max: resolve(flags.x_max, cfg, "x-max", d.x_max)?,
        x_th: resolve(flags.x_th, cfg, "x-th", d.x_th)?,
        squared_denominator: resolve(
            flags.squared_denominator,
            cfg,
            "squared-denominator",
            d.squared_denominator,
        )?,
    };
    model.validate().map_err(|e| e.to_string())?;
    Ok(model)
}

fn legi_params(
    flags: &LegiFlags,
    hill: Option<u32>,
    cfg: &ConfigFile,
) -> Result<LegiParams, String> {
    let d = LegiParams::default();
    let params = LegiParams {
        a: resolve(flags.a, cfg, "a", d.a)?,
        b: resolve(flags.b, cfg, "b", d.b)?,
        k_d: resolve(flags.k_d, cfg, "k-d", d.k_d)?,
        r_t: resolve(flags.r_t, cfg, "r-t", d.r_t)?,
        n_sectors: resolve(flags.sectors, cfg, "sectors", d.n_sectors)?,
        hill: resolve(hill, cfg, "hill", d.hill)?,
    };
    params.validate().map_err(|e| e.to_string())?;
    Ok(params)
}

/// Load (source, distortion) from the built-in model or from CSV files.
fn load_problem(
    model: ModelChoice,
    distortion: DistortionChoice,
    source_csv: &Option<PathBuf>,
    distortion_csv: &Option<PathBuf>,
    apoptosis: &ApoptosisFlags,
    cfg: &ConfigFile,
) -> Result<(Pmf, DistortionMatrix), String> {
    match model {
        ModelChoice::Apoptosis => {
            let m = apoptosis_model(apoptosis, cfg)?;
            let p = exp_source(&m).map_err(|e| e.to_string())?;
            let d = match distortion {
                DistortionChoice::Hamming => hamming_like(&m),
                DistortionChoice::Squared => rectified_squared(&m),
            }
            .map_err(|e| e.to_string())?;
            Ok((p, d))
        }
        ModelChoice::File => {
            let src = source_csv
                .as_ref()
                .ok_or("--model file requires --source-csv")?;
            let dst = distortion_csv
                .as_ref()
                .ok_or("--model file requires --distortion-csv")?;
            let p = io::read_source_pmf(src).map_err(|e| e.to_string())?;
            let d = io::read_distortion_matrix(dst).map_err(|e| e.to_string())?;
            if p.alphabet() != d.x_alphabet() {
                return Err("source and distortion x alphabets differ".into());
            }
            Ok((p, d))
        }
    }
}

fn resolve_seed(cli_seed: Option<u64>, cfg: &ConfigFile) -> Result<u64, String> {
    match resolve(cli_seed, cfg, "seed", u64::MAX)? {
        u64::MAX if cli_seed.is_none() && !cfg.entries.contains_key("seed") => {
            let seed: u64 = rand::random();
            eprintln!("seed: {seed} (from system entropy; pass --seed to reproduce)");
            Ok(seed)
        }
        s => Ok(s),
    }
}

/// Parse argv and run. Returns the process exit code; never panics on
/// malformed input.
pub fn run<I, S>(argv: I) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            // keep clap's help/version on stdout with exit 0
            let code = if e.exit_code() == 0 { 0 } else { EXIT_USAGE };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(cli) {
        Ok(code) => code,
        Err(msg) => {
            eprintln!("error: {msg}");
            EXIT_USAGE
        }
    }
}

fn dispatch(cli: Cli) -> Result<i32, String> {
    let cfg = match &cli.config {
        Some(path) => ConfigFile::load(path)?,
        None => ConfigFile::default(),
    };
    let threads = match cli.threads.or(cfg.get("threads")?) {
        Some(t) => Some(t),
        None => std::env::var("RATELENS_THREADS")
            .ok()
            .map(|v| v.parse().map_err(|_| "RATELENS_THREADS must be an integer"))
            .transpose()?,
    };
    if let Some(t) = threads {
        if t == 0 {
            return Err("--threads must be >= 1".into());
        }
        // ignore the error if a pool already exists (tests call run() twice)
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global();
    }

    match &cli.command {
        Command::RdCurve(args) => cmd_rd_curve(&cli, &cfg, args),
        Command::RdStrategy(args) => cmd_rd_strategy(&cli, &cfg, args),
        Command::Ibaa(args) => cmd_ibaa(args),
        Command::SimLegi(args) => cmd_sim_legi(&cli, &cfg, args),
        Command::SimApoptosis(args) => cmd_sim_apoptosis(&cli, &cfg, args),
        Command::Align(args) => cmd_align(args),
        Command::HillSweep(args) => cmd_hill_sweep(&cli, &cfg, args),
        Command::Roundtrip(args) => cmd_roundtrip(&cli, &cfg, args),
    }
}

#[derive(Serialize)]
struct CurveSidecar<'a> {
    command: &'a str,
    model: ModelChoice,
    distortion: Option<DistortionChoice>,
    apoptosis: Option<ApoptosisModel>,
    lambda_grid: &'a [f64],
    tol: f64,
    max_iter: usize,
    unconverged_points: usize,
}

fn cmd_rd_curve(cli: &Cli, cfg: &ConfigFile, args: &RdCurveArgs) -> Result<i32, String> {
    let (p, d) = load_problem(
        args.model,
        args.distortion,
        &args.source_csv,
        &args.distortion_csv,
        &args.apoptosis,
        cfg,
    )?;
    let grid = match args.lambda_grid.clone() {
        Some(g) if !g.is_empty() => g,
        _ => default_lambda_grid(),
    };
    if grid.iter().any(|&l| l < 0.0 || !l.is_finite()) {
        return Err("lambda grid entries must be finite and >= 0".into());
    }
    let tol = resolve(args.tol, cfg, "tol", 1e-10)?;
    let max_iter = resolve(args.max_iter, cfg, "max-iter", 100_000)?;
    let curve = rd_curve(&p, &d, &grid, tol, max_iter).map_err(|e| e.to_string())?;
    let unconverged = curve.points.iter().filter(|pt| !pt.converged).count();
    for pt in curve.points.iter().filter(|pt| !pt.converged) {
        eprintln!(
            "warning: lambda={} did not converge within {max_iter} iterations",
            pt.lambda
        );
    }
    io::write_rd_curve(&args.out, &curve).map_err(|e| e.to_string())?;
    let apop = (args.model == ModelChoice::Apoptosis)
        .then(|| apoptosis_model(&args.apoptosis, cfg))
        .transpose()?;
    io::write_sidecar(
        &args.out,
        &CurveSidecar {
            command: "rd-curve",
            model: args.model,
            distortion: apop.is_some().then_some(args.distortion),
            apoptosis: apop,
            lambda_grid: &grid,
            tol,
            max_iter,
            unconverged_points: unconverged,
        },
    )
    .map_err(|e| e.to_string())?;
    if cli.strict && unconverged > 0 {
        return Ok(EXIT_NOT_CONVERGED);
    }
    Ok(EXIT_OK)
}

#[derive(Serialize)]
struct StrategySidecar {
    command: &'static str,
    lambda: f64,
    rate_bits: f64,
    expected_distortion: f64,
    iterations: usize,
    converged: bool,
    tol: f64,
    max_iter: usize,
}

fn cmd_rd_strategy(cli: &Cli, cfg: &ConfigFile, args: &RdStrategyArgs) -> Result<i32, String> {
    let (p, d) = load_problem(
        args.model,
        args.distortion,
        &args.source_csv,
        &args.distortion_csv,
        &args.apoptosis,
        cfg,
    )?;
    let tol = resolve(args.tol, cfg, "tol", 1e-10)?;
    let max_iter = resolve(args.max_iter, cfg, "max-iter", 100_000)?;
    let (result, lambda) = match (args.lambda, args.target_distortion) {
        (_, Some(target)) => {
            let tol_d = resolve(args.tol_distortion, cfg, "tol-distortion", 1e-6)?;
            let cfg_baa = BaaConfig {
                lambda: 1.0,
                tol,
                max_iter,
            };
            let r =
                solve_for_distortion(&p, &d, target, tol_d, &cfg_baa).map_err(|e| e.to_string())?;
            (r, f64::NAN)
        }
        (lambda, None) => {
            let lambda = resolve(lambda, cfg, "lambda", 1.0)?;
            if lambda < 0.0 {
                return Err("--lambda must be >= 0".into());
            }
            let r = baa_solve(
                &p,
                &d,
                &BaaConfig {
                    lambda,
                    tol,
                    max_iter,
                },
            )
            .map_err(|e| e.to_string())?;
            (r, lambda)
        }
    };
    if !result.converged {
        eprintln!("warning: solve did not converge within {max_iter} iterations");
    }
    io::write_value_matrix(
        &args.out,
        result.strategy.x_alphabet(),
        result.strategy.y_alphabet(),
        result.strategy.rows(),
    )
    .map_err(|e| e.to_string())?;
    io::write_sidecar(
        &args.out,
        &StrategySidecar {
            command: "rd-strategy",
            lambda,
            rate_bits: result.rate_bits,
            expected_distortion: result.expected_distortion,
            iterations: result.iterations,
            converged: result.converged,
            tol,
            max_iter,
        },
    )
    .map_err(|e| e.to_string())?;
    if cli.strict && !result.converged {
        return Ok(EXIT_NOT_CONVERGED);
    }
    Ok(EXIT_OK)
}

#[derive(Serialize)]
struct IbaaSidecar {
    command: &'static str,
    lambda_assumed: f64,
    row_counts: Vec<u64>,
    max_tilde: f64,
    min_tilde: f64,
}

fn cmd_ibaa(args: &IbaaArgs) -> Result<i32, String> {
    let counts = io::read_count_matrix(&args.counts).map_err(|e| e.to_string())?;
    let result = ibaa_from_counts(&counts).map_err(|e| e.to_string())?;
    io::write_distortion_matrix(&args.out, &result.distortion).map_err(|e| e.to_string())?;
    let (min_tilde, max_tilde) = result
        .tilde_distortion
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
            (lo.min(v), hi.max(v))
        });
    io::write_sidecar(
        &args.out,
        &IbaaSidecar {
            command: "ibaa",
            lambda_assumed: result.lambda_assumed,
            row_counts: result.row_counts.unwrap_or_default(),
            max_tilde,
            min_tilde,
        },
    )
    .map_err(|e| e.to_string())?;
    Ok(EXIT_OK)
}

#[derive(Serialize)]
struct SimLegiSidecar {
    command: &'static str,
    params: LegiParams,
    seed: u64,
    trials: u64,
    mode: ModeChoice,
    wall_time_s: f64,
}

fn cmd_sim_legi(cli: &Cli, cfg: &ConfigFile, args: &SimLegiArgs) -> Result<i32, String> {
    let params = legi_params(&args.legi, args.hill, cfg)?;
    let trials = resolve(args.trials, cfg, "trials", 20_000_000)?;
    if trials < 1 {
        return Err("--trials must be >= 1".into());
    }
    let seed = resolve_seed(cli.seed, cfg)?;
    let sim = SimConfig::new(trials, seed, args.mode.into());
    let started = Instant::now();
    let out = simulate_with_progress(&params, &sim, |done, total| {
        eprintln!("sim-legi: {done}/{total} trials");
    })
    .map_err(|e| e.to_string())?;
    match &out {
        SimOutput::Counts(c) => io::write_count_matrix(&args.out, c),
        SimOutput::Weights(w) => {
            io::write_value_matrix(&args.out, &w.x_alphabet, &w.y_alphabet, &w.weights)
        }
    }
    .map_err(|e| e.to_string())?;
    io::write_sidecar(
        &args.out,
        &SimLegiSidecar {
            command: "sim-legi",
            params,
            seed,
            trials,
            mode: args.mode,
            wall_time_s: started.elapsed().as_secs_f64(),
        },
    )
    .map_err(|e| e.to_string())?;
    Ok(EXIT_OK)
}

#[derive(Serialize)]
struct SimApoptosisSidecar {
    command: &'static str,
    model: ApoptosisModel,
    distortion: DistortionChoice,
    lambda: f64,
    samples: u64,
    seed: u64,
    converged: bool,
    wall_time_s: f64,
}

fn cmd_sim_apoptosis(cli: &Cli, cfg: &ConfigFile, args: &SimApoptosisArgs) -> Result<i32, String> {
    use rand::Rng;
    use rand::SeedableRng;

    let model = apoptosis_model(&args.apoptosis, cfg)?;
    let lambda = resolve(args.lambda, cfg, "lambda", 1.0)?;
    let samples = resolve(args.samples, cfg, "samples", 10_000_000)?;
    if lambda < 0.0 {
        return Err("--lambda must be >= 0".into());
    }
    if samples < 1 {
        return Err("--samples must be >= 1".into());
    }
    let seed = resolve_seed(cli.seed, cfg)?;
    let tol = resolve(args.tol, cfg, "tol", 1e-10)?;
    let max_iter = resolve(args.max_iter, cfg, "max-iter", 100_000)?;
    let p = exp_source(&model).map_err(|e| e.to_string())?;
    let d = match args.distortion {
        DistortionChoice::Hamming => hamming_like(&model),
        DistortionChoice::Squared => rectified_squared(&model),
    }
    .map_err(|e| e.to_string())?;
    let started = Instant::now();
    let result = baa_solve(
        &p,
        &d,
        &BaaConfig {
            lambda,
            tol,
            max_iter,
        },
    )
    .map_err(|e| e.to_string())?;
    if !result.converged {
        eprintln!("warning: solve did not converge within {max_iter} iterations");
    }

    let joint =
        JointDist::from_source_and_strategy(&p, &result.strategy).map_err(|e| e.to_string())?;
    let cdf: Vec<f64> = joint
        .probs()
        .iter()
        .scan(0.0, |acc, &p| {
            *acc += p;
            Some(*acc)
        })
        .collect();
    let ny = joint.y_alphabet().len();
    let mut counts = vec![0u64; joint.probs().len()];
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..samples {
        let v: f64 = rng.random();
        let cell = cdf.partition_point(|&c| c <= v).min(counts.len() - 1);
        counts[cell] += 1;
    }
    let count_matrix = crate::probcore::CountMatrix::new(
        joint.x_alphabet().clone(),
        joint.y_alphabet().clone(),
        counts,
    )
    .map_err(|e| e.to_string())?;
    let _ = ny;
    io::write_count_matrix(&args.out, &count_matrix).map_err(|e| e.to_string())?;
    io::write_sidecar(
        &args.out,
        &SimApoptosisSidecar {
            command: "sim-apoptosis",
            model,
            distortion: args.distortion,
            lambda,
            samples,
            seed,
            converged: result.converged,
            wall_time_s: started.elapsed().as_secs_f64(),
        },
    )
    .map_err(|e| e.to_string())?;
    if cli.strict && !result.converged {
        return Ok(EXIT_NOT_CONVERGED);
    }
    Ok(EXIT_OK)
}

#[derive(Serialize)]
struct AlignSidecar {
    command: &'static str,
    peak: f64,
    half_height_width: f64,
}

fn cmd_align(args: &AlignArgs) -> Result<i32, String> {
    let d = io::read_distortion_matrix(&args.distortion).map_err(|e| e.to_string())?;
    let profile = cyclic_align(&d).map_err(|e| e.to_string())?;
    io::write_profile(
        &args.out,
        &profile,
        d.x_alphabet().labels(),
        args.include_rows,
    )
    .map_err(|e| e.to_string())?;
    let summary = profile_summary(0, &profile.mean);
    io::write_sidecar(
        &args.out,
        &AlignSidecar {
            command: "align",
            peak: summary.peak,
            half_height_width: summary.half_height_width,
        },
    )
    .map_err(|e| e.to_string())?;
    Ok(EXIT_OK)
}

#[derive(Serialize)]
struct HillSweepSidecar {
    command: &'static str,
    params: LegiParams,
    hills: Vec<u32>,
    trials: u64,
    seed: u64,
    mode: ModeChoice,
    summaries: Vec<crate::analysis::ProfileSummary>,
    wall_time_s: f64,
}

fn cmd_hill_sweep(cli: &Cli, cfg: &ConfigFile, args: &HillSweepArgs) -> Result<i32, String> {
    let params = legi_params(&args.legi, None, cfg)?;
    let hills = match args.hills.clone() {
        Some(h) if !h.is_empty() => h,
        _ => vec![1, 3, 5],
    };
    let trials = resolve(args.trials, cfg, "trials", 1_000_000)?;
    let seed = resolve_seed(cli.seed, cfg)?;
    std::fs::create_dir_all(&args.out_dir)
        .map_err(|e| format!("cannot create {}: {e}", args.out_dir.display()))?;
    let sim = SimConfig::new(trials, seed, args.mode.into());
    let started = Instant::now();
    let entries = hill_sweep(&params, &hills, &sim).map_err(|e| e.to_string())?;
    let labels = crate::legi::SectorAngles::new(params.n_sectors).alphabet();
    for entry in &entries {
        let path = args.out_dir.join(format!("profile_h{}.csv", entry.hill));
        io::write_profile(&path, &entry.profile, labels.labels(), false)
            .map_err(|e| e.to_string())?;
        io::write_sidecar(&path, &entry.summary).map_err(|e| e.to_string())?;
    }
    let summary_path = args.out_dir.join("summary.csv");
    {
        use std::io::Write;
        let mut w = std::io::BufWriter::new(
            std::fs::File::create(&summary_path).map_err(|e| e.to_string())?,
        );
        writeln!(w, "hill,peak,half_height_width").map_err(|e| e.to_string())?;
        for e in &entries {
            writeln!(
                w,
                "{},{},{}",
                e.hill, e.summary.peak, e.summary.half_height_width
            )
            .map_err(|err| err.to_string())?;
        }
    }
    io::write_sidecar(
        &summary_path,
        &HillSweepSidecar {
            command: "hill-sweep",
            params,
            hills,
            trials,
            seed,
            mode: args.mode,
            summaries: entries.iter().map(|e| e.summary.clone()).collect(),
            wall_time_s: started.elapsed().as_secs_f64(),
        },
    )
    .map_err(|e| e.to_string())?;
    Ok(EXIT_OK)
}

#[derive(Serialize)]
struct RoundtripSidecar {
    command: &'static str,
    model: ApoptosisModel,
    distortion: DistortionChoice,
    #[serde(flatten)]
    report: crate::ibaa::RoundtripReport,
}

fn cmd_roundtrip(cli: &Cli, cfg: &ConfigFile, args: &RoundtripArgs) -> Result<i32, String> {
    let model = apoptosis_model(&args.apoptosis, cfg)?;
    let lambda = resolve(args.lambda, cfg, "lambda", 1.0)?;
    if lambda < 0.0 {
        return Err("--lambda must be >= 0".into());
    }
    let tol = resolve(args.tol, cfg, "tol", 1e-12)?;
    let max_iter = resolve(args.max_iter, cfg, "max-iter", 200_000)?;
    let p = exp_source(&model).map_err(|e| e.to_string())?;
    let d = match args.distortion {
        DistortionChoice::Hamming => hamming_like(&model),
        DistortionChoice::Squared => rectified_squared(&model),
    }
    .map_err(|e| e.to_string())?;
    let report = roundtrip_validate(&p, &d, lambda, tol, max_iter).map_err(|e| e.to_string())?;
    if !report.baa_converged {
        eprintln!("warning: generating solve did not converge");
    }
    let sidecar = RoundtripSidecar {
        command: "roundtrip",
        model,
        distortion: args.distortion,
        report: report.clone(),
    };
    let json = serde_json::to_string_pretty(&sidecar).map_err(|e| e.to_string())?;
    std::fs::write(&args.out, &json).map_err(|e| e.to_string())?;
    println!("{json}");
    if cli.strict && !report.baa_converged {
        return Ok(EXIT_NOT_CONVERGED);
    }
    Ok(EXIT_OK)
}
