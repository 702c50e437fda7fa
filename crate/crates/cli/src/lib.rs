//! Command-line front end: argument parsing, command dispatch and output files.

pub mod commands;
pub mod error;
pub mod output;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

pub use error::CliError;

/// Environment variable capping the worker thread count.
pub const THREADS_ENV: &str = "AVARKIT_THREADS";

#[derive(Debug, Parser)]
#[command(
    name = "avarkit",
    version,
    about = "Allan variance analysis and sensor noise identification"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Allan curves and noise budget for every channel of a recording
    Analyze(AnalyzeArgs),
    /// Synthetic recording from a simulation spec
    Simulate(SimulateArgs),
    /// Simulate, identify and compare against the generating coefficients
    Roundtrip(RoundtripArgs),
    /// Overlay an empirical curve with a model
    Validate(ValidateArgs),
    /// Plot-ready curve, confidence band and model components per channel
    Plotdata(PlotdataArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum EstimatorArg {
    Standard,
    Overlapping,
}

impl From<EstimatorArg> for avarkit::Estimator {
    fn from(e: EstimatorArg) -> Self {
        match e {
            EstimatorArg::Standard => avarkit::Estimator::Standard,
            EstimatorArg::Overlapping => avarkit::Estimator::Overlapping,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct GridArgs {
    #[arg(long, value_enum, default_value = "overlapping")]
    pub estimator: EstimatorArg,
    /// Cluster times per decade
    #[arg(long, default_value_t = avarkit::allan::DEFAULT_POINTS_PER_DECADE)]
    pub ppd: usize,
}

#[derive(Debug, Clone, Args)]
pub struct AnalyzeArgs {
    /// Recording CSV: a time column followed by one column per channel
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub output_dir: PathBuf,
    #[command(flatten)]
    pub grid: GridArgs,
}

#[derive(Debug, Clone, Args)]
pub struct SimulateArgs {
    /// Simulation spec JSON
    #[arg(long)]
    pub spec: PathBuf,
    #[arg(long)]
    pub output_dir: PathBuf,
    /// Overrides the seed in the spec
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Args)]
pub struct RoundtripArgs {
    #[arg(long)]
    pub spec: PathBuf,
    #[arg(long)]
    pub output_dir: PathBuf,
    #[arg(long)]
    pub seed: Option<u64>,
    #[command(flatten)]
    pub grid: GridArgs,
}

#[derive(Debug, Clone, Args)]
pub struct ValidateArgs {
    /// Curve CSV with columns tau,avar,adev,rel_ci
    #[arg(long)]
    pub input: PathBuf,
    /// Noise parameters JSON, or a budget JSON together with --channel
    #[arg(long, conflicts_with = "model", required_unless_present = "model")]
    pub params: Option<PathBuf>,
    /// Channel to take from a budget JSON
    #[arg(long)]
    pub channel: Option<String>,
    /// Model curve CSV on the same cluster times as --input
    #[arg(long)]
    pub model: Option<PathBuf>,
    #[arg(long)]
    pub output_dir: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct PlotdataArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub output_dir: PathBuf,
    #[command(flatten)]
    pub grid: GridArgs,
}

/// Reads the thread cap from the environment and sizes the global pool.
pub fn configure_threads() -> Result<(), CliError> {
    let Ok(raw) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let n: usize = raw.trim().parse().ok().filter(|&n| n > 0).ok_or_else(|| {
        CliError::new(
            "invalid_env",
            format!("{THREADS_ENV} must be a positive integer, got `{raw}`"),
        )
    })?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::new("invalid_env", e.to_string()))
}

pub fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Analyze(a) => commands::analyze(&a),
        Command::Simulate(a) => commands::simulate(&a),
        Command::Roundtrip(a) => commands::roundtrip(&a),
        Command::Validate(a) => commands::validate(&a),
        Command::Plotdata(a) => commands::plotdata(&a),
    }
}
