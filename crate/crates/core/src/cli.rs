//! Command-line front end. Data goes to stdout (or `--out`), diagnostics to stderr.
//!
//! Exit codes: 0 success, 2 invalid arguments or unreadable input, 1 runtime failure.

use std::ffi::OsString;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::sync::Mutex;

use clap::{Parser, Subcommand};
use serde_json::json;

use crate::error::Error;
use crate::model::SmsnParams;
use crate::numerics::{Matrix, RngStream, Vector};
use crate::simulation::{run_experiment_with_progress, SimulationConfig, FULL_REPLICATIONS};
use crate::skewness::{analytic_max_direction, analytic_max_skewness, estimate_max_direction, EstimatorOptions};

pub const EXIT_OK: i32 = 0;
pub const EXIT_RUNTIME: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

/// Environment variable capping the worker count.
pub const THREADS_ENV: &str = "SMSN_THREADS";

#[derive(Parser, Debug)]
#[command(name = "smsn", version, about = "Maximal-skewness projections for scale mixtures of skew-normal vectors")]
pub struct Cli {
    /// Suppress progress messages.
    #[arg(long, short, global = true)]
    pub quiet: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Draw a sample and write it as CSV (header x1..xp).
    Sample {
        #[arg(long)]
        params: PathBuf,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Output file; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Evaluate the density at one point.
    Density {
        #[arg(long)]
        params: PathBuf,
        /// Comma-separated coordinates.
        #[arg(long, allow_hyphen_values = true)]
        at: String,
        /// Absolute tolerance of the mixture integral.
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
    },
    /// Report the mixing moment condition and the skewness coefficients a, b, c.
    CheckMoments {
        #[arg(long)]
        params: PathBuf,
    },
    /// Analytic maximal-skewness direction and value.
    Maxskew {
        #[arg(long)]
        params: PathBuf,
    },
    /// Estimate the maximal-skewness direction from CSV data.
    Estimate {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, default_value_t = 8)]
        restarts: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 500)]
        max_iter: usize,
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
    },
    /// Run the simulation grid and write the MSE table as CSV.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        /// Output file; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Use the full replication count.
        #[arg(long)]
        full: bool,
        /// Optional per-replication CSV.
        #[arg(long)]
        replications_out: Option<PathBuf>,
    },
}

#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    fn usage(message: impl Into<String>) -> Self {
        Self { code: EXIT_USAGE, message: message.into() }
    }

    fn runtime(message: impl Into<String>) -> Self {
        Self { code: EXIT_RUNTIME, message: message.into() }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        Self::runtime(e.to_string())
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

fn read_input(path: &Path) -> CliResult<String> {
    fs::read_to_string(path).map_err(|e| CliError::usage(format!("cannot read {}: {e}", path.display())))
}

fn load_params(path: &Path) -> CliResult<SmsnParams<f64>> {
    SmsnParams::from_json(&read_input(path)?).map_err(|e| CliError::usage(format!("{}: {e}", path.display())))
}

fn load_config(path: &Path) -> CliResult<SimulationConfig> {
    let cfg: SimulationConfig = serde_json::from_str(&read_input(path)?)
        .map_err(|e| CliError::usage(format!("{}: simulation config: {e}", path.display())))?;
    Ok(cfg)
}

/// Reads numeric CSV rows; a non-numeric first row is taken as a header.
fn load_data(path: &Path) -> CliResult<Matrix<f64>> {
    let bad = |m: String| CliError::usage(format!("{}: {m}", path.display()));
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| bad(e.to_string()))?;
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record.map_err(|e| bad(e.to_string()))?;
        let parsed: Result<Vec<f64>, _> = record.iter().map(str::parse::<f64>).collect();
        match parsed {
            Ok(row) => rows.push(row),
            Err(_) if i == 0 => continue,
            Err(e) => return Err(bad(format!("row {}: {e}", i + 1))),
        }
    }
    if rows.is_empty() {
        return Err(bad("no data rows".into()));
    }
    Matrix::from_rows(&rows).map_err(|e| bad(e.to_string()))
}

/// Writes through a temporary file in the target directory and renames it into place.
fn write_atomic(path: &Path, contents: &str) -> CliResult<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d.to_path_buf(),
        _ => PathBuf::from("."),
    };
    let fail = |e: &dyn std::fmt::Display| CliError::runtime(format!("cannot write {}: {e}", path.display()));
    let mut tmp = tempfile::NamedTempFile::new_in(&dir).map_err(|e| fail(&e))?;
    tmp.write_all(contents.as_bytes()).map_err(|e| fail(&e))?;
    tmp.as_file().sync_all().map_err(|e| fail(&e))?;
    tmp.persist(path).map_err(|e| fail(&e.error))?;
    Ok(())
}

fn emit(out: &mut dyn Write, target: Option<&Path>, contents: &str) -> CliResult<()> {
    match target {
        Some(path) => write_atomic(path, contents),
        None => out.write_all(contents.as_bytes()).map_err(|e| CliError::runtime(format!("stdout: {e}"))),
    }
}

fn sample_csv(x: &Matrix<f64>) -> String {
    let mut s = (1..=x.cols()).map(|j| format!("x{j}")).collect::<Vec<_>>().join(",");
    s.push('\n');
    for r in 0..x.rows() {
        let row: Vec<String> = x.row(r).iter().map(|v| v.to_string()).collect();
        s.push_str(&row.join(","));
        s.push('\n');
    }
    s
}

fn cmd_sample(out: &mut dyn Write, params: &Path, n: usize, seed: u64, target: Option<&Path>) -> CliResult<()> {
    let params = load_params(params)?;
    let x = params.sample(n, &mut RngStream::new(seed, 0))?;
    emit(out, target, &sample_csv(&x))
}

fn cmd_density(out: &mut dyn Write, params: &Path, at: &str, tol: f64) -> CliResult<()> {
    let params = load_params(params)?;
    let coords: Vec<f64> = at
        .split(',')
        .map(|s| s.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|e| CliError::usage(format!("--at: {e}")))?;
    let x = Vector::new(coords).map_err(|e| CliError::usage(format!("--at: {e}")))?;
    if x.dim() != params.dim() {
        return Err(CliError::usage(format!("--at has {} coordinates, model has dimension {}", x.dim(), params.dim())));
    }
    let value = match params.mixing() {
        crate::mixing::MixingDistribution::Degenerate | crate::mixing::MixingDistribution::InvSqrtChiSq { .. } => {
            params.density(&x)?
        }
        _ => params.density_smsn(&x, tol)?,
    };
    writeln!(out, "{value}").map_err(|e| CliError::runtime(e.to_string()))
}

fn cmd_check_moments(out: &mut dyn Write, params: &Path) -> CliResult<()> {
    let params = load_params(params)?;
    let mixing = params.mixing();
    let cond = mixing.check_moment_condition()?;
    // c = (2/pi) E(S)^2 / E(S^2)
    let c = cond.lhs / (2.0 * cond.rhs);
    let (a, b) = match mixing.coefficients() {
        Ok(coef) => (Some(coef.a), Some(coef.b)),
        Err(Error::MomentUndefined { .. }) => (None, None),
        Err(e) => return Err(e.into()),
    };
    let doc = json!({
        "law": mixing.label(),
        "lhs": cond.lhs,
        "rhs": cond.rhs,
        "holds": cond.holds,
        "a": a,
        "b": b,
        "c": c,
    });
    writeln!(out, "{}", serde_json::to_string_pretty(&doc).expect("json")).map_err(|e| CliError::runtime(e.to_string()))
}

fn cmd_maxskew(out: &mut dyn Write, params: &Path) -> CliResult<()> {
    let params = load_params(params)?;
    let gamma1 = analytic_max_skewness(&params)?;
    let doc = match analytic_max_direction(&params) {
        Ok(d) => json!({
            "direction": d.direction.as_slice(),
            "gamma1": gamma1,
            "condition_ok": d.condition_holds,
        }),
        Err(Error::NoUniqueDirection) => json!({
            "direction": null,
            "gamma1": gamma1,
            "condition_ok": params.mixing().check_moment_condition().map(|c| c.holds).unwrap_or(false),
        }),
        Err(e) => return Err(e.into()),
    };
    writeln!(out, "{}", serde_json::to_string_pretty(&doc).expect("json")).map_err(|e| CliError::runtime(e.to_string()))
}

fn cmd_estimate(out: &mut dyn Write, input: &Path, opts: EstimatorOptions) -> CliResult<()> {
    let data = load_data(input)?;
    let est = estimate_max_direction(&data, &opts)?;
    let doc = json!({
        "direction": est.direction.as_slice(),
        "gamma1": est.gamma1,
        "converged": est.converged,
        "iterations": est.iterations,
    });
    writeln!(out, "{}", serde_json::to_string_pretty(&doc).expect("json")).map_err(|e| CliError::runtime(e.to_string()))
}

fn cmd_simulate(
    out: &mut dyn Write,
    err: &mut (dyn Write + Send),
    quiet: bool,
    config: &Path,
    target: Option<&Path>,
    full: bool,
    replications_out: Option<&Path>,
) -> CliResult<()> {
    let mut cfg = load_config(config)?;
    if full {
        cfg.replications = FULL_REPLICATIONS;
    }
    cfg.keep_replications = replications_out.is_some();
    cfg.validate().map_err(|e| CliError::usage(format!("{}: {e}", config.display())))?;
    let total = cfg.cells().len() * cfg.replications;
    if !quiet {
        let _ = writeln!(err, "simulating {} cells x {} replications", cfg.cells().len(), cfg.replications);
    }
    let step = (total / 20).max(1);
    let shared_err = Mutex::new(&mut *err);
    let progress = |done: usize, total: usize| {
        if !quiet && (done % step == 0 || done == total) {
            if let Ok(mut e) = shared_err.lock() {
                let _ = writeln!(e, "  {done}/{total}");
            }
        }
    };
    let report = run_experiment_with_progress(&cfg, &progress)?;
    drop(shared_err);
    for c in &report.cells {
        if c.failures > 0 && !quiet {
            let _ = writeln!(
                err,
                "warning: cell p={} n={} nu={} rho={}: {} estimator failures",
                c.cell.p, c.cell.n, c.cell.nu, c.cell.rho, c.failures
            );
        }
    }
    if let Some(path) = replications_out {
        write_atomic(path, &report.replications_csv())?;
    }
    emit(out, target, &report.to_csv())
}

fn configure_threads() -> CliResult<()> {
    let Ok(value) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let threads: usize = value
        .trim()
        .parse()
        .ok()
        .filter(|&t| t > 0)
        .ok_or_else(|| CliError::usage(format!("{THREADS_ENV} must be a positive integer, got {value:?}")))?;
    // a pool built earlier in the same process keeps its size
    let _ = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global();
    Ok(())
}

fn dispatch(cli: Cli, out: &mut dyn Write, err: &mut (dyn Write + Send)) -> CliResult<()> {
    configure_threads()?;
    match cli.command {
        Command::Sample { params, n, seed, out: target } => cmd_sample(out, &params, n, seed, target.as_deref()),
        Command::Density { params, at, tol } => cmd_density(out, &params, &at, tol),
        Command::CheckMoments { params } => cmd_check_moments(out, &params),
        Command::Maxskew { params } => cmd_maxskew(out, &params),
        Command::Estimate { input, restarts, seed, max_iter, tol } => {
            if !(tol > 0.0) || max_iter == 0 {
                return Err(CliError::usage("--tol must be positive and --max-iter at least 1"));
            }
            cmd_estimate(out, &input, EstimatorOptions { restarts, max_iter, tol, seed })
        }
        Command::Simulate { config, out: target, full, replications_out } => {
            cmd_simulate(out, err, cli.quiet, &config, target.as_deref(), full, replications_out.as_deref())
        }
    }
}

/// Parses `args` (including the program name) and runs the command; returns the exit code.
pub fn run<I, A>(args: I, out: &mut dyn Write, err: &mut (dyn Write + Send)) -> i32
where
    I: IntoIterator<Item = A>,
    A: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let rendered = e.render().to_string();
            if e.use_stderr() {
                let _ = err.write_all(rendered.as_bytes());
            } else {
                let _ = out.write_all(rendered.as_bytes());
            }
            return code;
        }
    };
    match dispatch(cli, out, err) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(err, "error: {}", e.message);
            e.code
        }
    }
}

/// Entry point for the binary.
pub fn main() -> i32 {
    let stdout = io::stdout();
    let code = run(std::env::args_os(), &mut stdout.lock(), &mut io::stderr());
    let _ = io::stdout().flush();
    code
}
