use std::path::PathBuf;

use chi2_regimes::limits::{DEFAULT_LAMBDA_HI, DEFAULT_LAMBDA_LO};
use chi2_regimes::Convention;
use clap::{Args, Parser, Subcommand, ValueEnum};

/// Pearson chi-square goodness of fit with many cells.
#[derive(Debug, Parser)]
#[command(name = "chi2-regimes", version, about)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Test observed counts against a cell distribution.
    Gof(GofArgs),
    /// Run a Monte Carlo experiment from a JSON config.
    Simulate(SimulateArgs),
    /// Run an experiment at every point of a schedule.
    Sweep(SweepArgs),
    /// Print exact finite-n theory values as JSON.
    Theory(TheoryArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum DistKind {
    Uniform,
    Powerlaw,
}

/// Cell distribution flags shared by `gof` and `theory`.
#[derive(Debug, Args)]
pub struct DistArgs {
    #[arg(long, value_enum, default_value = "uniform")]
    pub dist: DistKind,
    /// Power-law exponent, `0 <= alpha < 1`.
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Number of cells (taken from --probs when given).
    #[arg(long)]
    pub m: Option<u64>,
    /// Cell probabilities, one per line; overrides --dist.
    #[arg(long, value_name = "FILE")]
    pub probs: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct GofArgs {
    /// Counts CSV with rows `cell_index,count`.
    #[arg(long, value_name = "FILE")]
    pub counts: PathBuf,
    #[command(flatten)]
    pub dist: DistArgs,
    #[arg(long, default_value = "theorem", value_parser = parse_convention)]
    pub convention: Convention,
    #[arg(long, default_value_t = DEFAULT_LAMBDA_LO)]
    pub lambda_lo: f64,
    #[arg(long, default_value_t = DEFAULT_LAMBDA_HI)]
    pub lambda_hi: f64,
    /// Also write the report to DIR/gof.json.
    #[arg(long, value_name = "DIR")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// Experiment config (JSON).
    pub config: PathBuf,
    /// Overrides the config seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Overrides the config replicate count.
    #[arg(long)]
    pub replicates: Option<u64>,
    #[arg(long, value_parser = parse_convention)]
    pub convention: Option<Convention>,
    #[arg(long)]
    pub lambda_lo: Option<f64>,
    #[arg(long)]
    pub lambda_hi: Option<f64>,
    /// Output directory for result.json.
    #[arg(long, value_name = "DIR", default_value = ".")]
    pub out: PathBuf,
    /// Also write per-replicate values to DIR/replicates.csv.
    #[arg(long)]
    pub csv: bool,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    /// Sweep config (JSON) with a `schedule` object.
    pub config: PathBuf,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub replicates: Option<u64>,
    #[arg(long, value_parser = parse_convention)]
    pub convention: Option<Convention>,
    #[arg(long)]
    pub lambda_lo: Option<f64>,
    #[arg(long)]
    pub lambda_hi: Option<f64>,
    /// Output directory for sweep.csv and sweep.json.
    #[arg(long, value_name = "DIR", default_value = ".")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct TheoryArgs {
    /// Sample size.
    #[arg(long)]
    pub n: u64,
    #[command(flatten)]
    pub dist: DistArgs,
    #[arg(long, default_value_t = 1.0)]
    pub delta: f64,
    #[arg(long, default_value_t = 0.5)]
    pub epsilon: f64,
}

fn parse_convention(s: &str) -> Result<Convention, String> {
    s.parse().map_err(|e: chi2_regimes::Error| e.to_string())
}
