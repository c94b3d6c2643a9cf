//! `infoqm` command-line front end.
//!
//! Exit codes: 0 on success, 2 on invalid input or I/O failure, 3 when a
//! solver fails to converge. Every `--out` file gets a sibling
//! `<out>.manifest.json`.

use std::ffi::OsString;
use std::path::PathBuf;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use thiserror::Error;

use infoqm_core::threads;

mod commands;
pub mod emit;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error("convergence failure: {0}")]
    Convergence(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Invalid(_) | CliError::Io(_) => 2,
            CliError::Convergence(_) => 3,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "infoqm", version, about = "Maximum-entropy densities and logarithmic NLS eigenstates")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    /// Maximum-entropy fits from moment constraints.
    #[command(subcommand)]
    Maxent(MaxentCmd),
    /// Partial sums of binomial and exponential series.
    #[command(subcommand)]
    Series(SeriesCmd),
    /// Closed-form states of the x²/2 problem.
    #[command(subcommand)]
    Oscillator(OscillatorCmd),
    /// Grid ground states of the logarithmic NLS equation.
    #[command(subcommand)]
    Nls(NlsCmd),
    /// Overlaps and projections for the oscillator family.
    #[command(subcommand)]
    Analyze(AnalyzeCmd),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum MaxentCmd {
    /// Fit multipliers to a JSON moment spec (one- or two-dimensional).
    Fit(MaxentFitArgs),
}

#[derive(Debug, Args, Serialize)]
pub struct MaxentFitArgs {
    /// Moment spec JSON.
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, default_value = "1e-10")]
    pub tol: f64,
    /// Previously fitted density JSON used as the starting point.
    #[arg(long)]
    pub init: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SeriesCmd {
    /// Partial sums and Cauchy differences up to `--n-max`.
    Probe(SeriesProbeArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SeriesKindArg {
    /// (1 + a x)^k
    Binomial,
    /// (1 + x y)^k
    BinomialXy,
    /// exp(x y)
    ExpXy,
}

#[derive(Debug, Args, Serialize)]
pub struct SeriesProbeArgs {
    #[arg(long, value_enum, default_value = "binomial")]
    pub kind: SeriesKindArg,
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    pub a: f64,
    #[arg(long, default_value_t = -1.0, allow_negative_numbers = true)]
    pub k: f64,
    #[arg(long, default_value_t = 0.5, allow_negative_numbers = true)]
    pub x: f64,
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    pub y: f64,
    #[arg(long, default_value_t = 60)]
    pub n_max: usize,
    #[arg(long, value_enum, default_value = "csv")]
    pub format: Format,
    #[arg(long, default_value_t = 12)]
    pub digits: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum OscillatorCmd {
    /// Columns n,k,alpha,beta,lambda,energy for n = 0..=n-max.
    Table(OscillatorTableArgs),
}

#[derive(Debug, Args, Serialize)]
pub struct OscillatorTableArgs {
    #[arg(long, default_value_t = 7, allow_negative_numbers = true)]
    pub n_max: i64,
    #[arg(long, value_enum, default_value = "csv")]
    pub format: Format,
    #[arg(long, default_value_t = 12)]
    pub digits: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum NlsCmd {
    /// Ground state by normalized gradient flow, optionally self-consistent.
    Ground(NlsGroundArgs),
}

#[derive(Debug, Args, Serialize)]
pub struct NlsGroundArgs {
    #[arg(long, num_args = 2, value_names = ["A", "B"], default_values_t = [-12.0, 12.0], allow_negative_numbers = true)]
    pub domain: Vec<f64>,
    #[arg(long, default_value_t = 2048)]
    pub grid: usize,
    /// Solve for the coefficient with mu(b) = b instead of fixing b.
    #[arg(long)]
    pub lambda_solve: bool,
    /// Fixed nonlinear coefficient when not solving for it.
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub b: f64,
    #[arg(long, num_args = 2, value_names = ["LO", "HI"], default_values_t = [-3.0, -0.5], allow_negative_numbers = true)]
    pub bracket: Vec<f64>,
    #[arg(long, default_value_t = 0.01)]
    pub tau: f64,
    #[arg(long, default_value = "1e-10")]
    pub tol: f64,
    #[arg(long, default_value_t = 200_000)]
    pub max_iters: usize,
    #[arg(long, default_value = "1e-100")]
    pub eps_log: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Also rerun from this many seeded random starts and report the spread.
    #[arg(long)]
    pub probe: Option<usize>,
    /// Earlier output whose state seeds the flow.
    #[arg(long)]
    pub resume: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum AnalyzeCmd {
    /// Gram matrix of the state family.
    Gram(GramArgs),
    /// Least-squares projection of a target onto the family.
    Project(ProjectArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    /// Self-consistent logarithmic states.
    Log,
    /// Linear harmonic eigenstates.
    Linear,
}

#[derive(Debug, Args, Serialize)]
pub struct GramArgs {
    #[arg(long, default_value_t = 7, allow_negative_numbers = true)]
    pub n_max: i64,
    #[arg(long, value_enum, default_value = "log")]
    pub family: Family,
    #[arg(long, value_enum, default_value = "csv")]
    pub format: Format,
    #[arg(long, default_value_t = 12)]
    pub digits: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct ProjectArgs {
    /// Target JSON.
    #[arg(long)]
    pub target: PathBuf,
    #[arg(long, value_delimiter = ',', default_value = "2,4,8")]
    pub orders: Vec<usize>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// What a subcommand hands back for the manifest.
pub(crate) struct Outcome {
    pub out: Option<PathBuf>,
    pub warnings: Vec<String>,
    /// Set when a partial artifact was written before a solver failure.
    pub failure: Option<CliError>,
}

/// Parses `argv`, runs the subcommand and returns the process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let argv: Vec<OsString> = argv.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let echo: Vec<String> = argv.iter().skip(1).map(|a| a.to_string_lossy().into_owned()).collect();
    match execute(&cli, &echo) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("infoqm: {e}");
            e.exit_code()
        }
    }
}

fn execute(cli: &Cli, echo: &[String]) -> Result<(), CliError> {
    let cap = threads::thread_cap().map_err(CliError::Invalid)?;
    let start = Instant::now();
    let outcome = threads::install(cap, || commands::dispatch(&cli.command)).map_err(CliError::Invalid)??;
    if let Some(out) = &outcome.out {
        let config = serde_json::to_value(&cli.command).map_err(|e| CliError::Invalid(e.to_string()))?;
        let manifest = emit::RunManifest {
            tool: "infoqm",
            version: env!("CARGO_PKG_VERSION"),
            argv: echo,
            config,
            threads: cap,
            wall_time_seconds: start.elapsed().as_secs_f64(),
            warnings: &outcome.warnings,
        };
        emit::write_manifest(out, &manifest)?;
    }
    for w in &outcome.warnings {
        eprintln!("warning: {w}");
    }
    match outcome.failure {
        Some(e) => Err(e),
        None => Ok(()),
    }
}
