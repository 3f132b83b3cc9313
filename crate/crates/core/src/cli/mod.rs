//! Command-line front end: `run`, `sweep`, `rates` and `oracle-compare`.
//!
//! Exit status is 0 when every comparison passes, 2 when a comparison misses
//! its tolerance (or a sweep point fails), and 1 on any error.

pub mod config;
pub mod output;
pub mod presets;
pub mod run;
pub mod sweep;

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

pub use config::{ScenarioConfig, ScenarioTag};
pub use presets::{preset, PRESET_NAMES};
pub use run::{oracle_comparison, rates, run_config, RunOutcome};
pub use sweep::{run_sweep, SweepSpec};

use crate::{Error, Result};

pub const EXIT_PASS: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_FAIL: i32 = 2;

pub const DEFAULT_ORACLE_TOL: f64 = 1e-6;

#[derive(Debug, Parser)]
#[command(name = "collcool", version, about = "Collective cavity cooling simulator")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Simulate one scenario, write its trajectory CSV and comparison report.
    Run(RunArgs),
    /// Run a parameter grid in parallel and write the aggregate CSV.
    Sweep(SweepArgs),
    /// Print couplings, analytic rates and the regime report as JSON.
    Rates(Source),
    /// Compare the moment equations with the bosonic covariance oracle.
    OracleCompare(OracleArgs),
}

#[derive(Debug, Args)]
pub struct Source {
    /// Scenario config file (JSON).
    #[arg(long, conflicts_with = "preset")]
    pub config: Option<PathBuf>,
    /// Built-in scenario: fig2a, fig2b, dicke4 or oracle.
    #[arg(long)]
    pub preset: Option<String>,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    #[command(flatten)]
    pub source: Source,
    /// Output directory.
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
    /// Relative tolerance of the rate comparison.
    #[arg(long)]
    pub tol: Option<f64>,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    /// Sweep spec file (JSON).
    #[arg(long)]
    pub config: PathBuf,
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
    /// Worker threads; overrides the spec and the COLLCOOL_JOBS variable.
    #[arg(long)]
    pub jobs: Option<usize>,
}

#[derive(Debug, Args)]
pub struct OracleArgs {
    #[command(flatten)]
    pub source: Source,
    /// Directory for the JSON report; stdout only when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, default_value_t = DEFAULT_ORACLE_TOL)]
    pub tol: f64,
}

impl Source {
    pub fn load(&self) -> Result<ScenarioConfig> {
        match (&self.config, &self.preset) {
            (Some(path), None) => ScenarioConfig::from_json(&read(path)?),
            (None, Some(name)) => preset(name),
            _ => Err(Error::Config("pass one of --config PATH or --preset NAME".into())),
        }
    }
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
}

fn status(pass: bool) -> i32 {
    if pass {
        EXIT_PASS
    } else {
        EXIT_FAIL
    }
}

fn print_json<T: serde::Serialize>(value: &T) -> Result<()> {
    println!("{}", serde_json::to_string_pretty(value)?);
    Ok(())
}

fn cmd_run(args: &RunArgs) -> Result<i32> {
    let mut cfg = args.source.load()?;
    if let Some(tol) = args.tol {
        cfg.fit.tolerance = tol;
    }
    let out = run_config(&cfg)?;
    fs::create_dir_all(&args.out)?;
    let label = cfg.label();
    let csv = cfg.output.csv.clone().unwrap_or_else(|| format!("{label}.csv"));
    let report = cfg.output.report.clone().unwrap_or_else(|| format!("{label}.report.json"));
    output::write_csv(&args.out.join(csv), &out.columns, &out.rows)?;
    output::write_json(&args.out.join(report), &out.report)?;
    print_json(&out.report)?;
    Ok(status(out.passed()))
}

fn cmd_sweep(args: &SweepArgs) -> Result<i32> {
    let spec = SweepSpec::from_json(&read(&args.config)?)?;
    let jobs = sweep::resolve_jobs(args.jobs, &spec)?;
    let rows = run_sweep(&spec, jobs)?;
    fs::create_dir_all(&args.out)?;
    let path = args.out.join("sweep.csv");
    sweep::write_sweep(fs::File::create(&path)?, &spec, &rows)?;
    let failed = rows.iter().filter(|r| r.outcome.is_err()).count();
    for row in &rows {
        if let Err(msg) = &row.outcome {
            eprintln!("sweep point {:?} failed: {msg}", row.values);
        }
    }
    println!("{} points, {failed} failed, written to {}", rows.len(), path.display());
    Ok(status(failed == 0))
}

fn cmd_oracle(args: &OracleArgs) -> Result<i32> {
    let cfg = args.source.load()?;
    let report = oracle_comparison(&cfg, args.tol)?;
    if let Some(dir) = &args.out {
        fs::create_dir_all(dir)?;
        output::write_json(&dir.join(format!("{}.oracle.json", cfg.label())), &report)?;
    }
    print_json(&report)?;
    Ok(status(report.pass))
}

pub fn execute(cli: &Cli) -> Result<i32> {
    match &cli.command {
        Command::Run(a) => cmd_run(a),
        Command::Sweep(a) => cmd_sweep(a),
        Command::Rates(s) => {
            print_json(&rates(&s.load()?)?)?;
            Ok(EXIT_PASS)
        }
        Command::OracleCompare(a) => cmd_oracle(a),
    }
}

/// Parses `args` (program name first) and runs the command; returns the exit status.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_ERROR } else { EXIT_PASS };
        }
    };
    match execute(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_ERROR
        }
    }
}
