use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(
    name = "brier",
    version,
    about = "Brier score decomposition with variance estimates"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Decompose a forecast archive read from a `p,y` CSV file.
    Decompose(DecomposeArgs),
    /// Run the Monte Carlo experiments on the artificial forecast scheme.
    Simulate(SimulateArgs),
    /// Fit a seasonal AR(1) model and score its exceedance forecasts.
    Ar1(Ar1Args),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    Table1,
    Coverage,
    Convergence,
}

#[derive(Debug, Args)]
pub struct DecomposeArgs {
    #[arg(long)]
    pub input: PathBuf,
    /// Number of equal-width bins.
    #[arg(long, conflicts_with = "edges")]
    pub bins: Option<usize>,
    /// Comma-separated bin edges from 0 to 1.
    #[arg(long)]
    pub edges: Option<String>,
    #[arg(long, value_enum, default_value = "json")]
    pub format: Format,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long, default_value_t = 10_000)]
    pub trials: usize,
    /// Forecasts per trial.
    #[arg(long, default_value_t = 250)]
    pub n: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum, default_value = "table1")]
    pub mode: Mode,
    /// Interval half-width in standard deviations (coverage mode).
    #[arg(long, default_value_t = 2.0)]
    pub k: f64,
    /// Comma-separated trial sizes (convergence mode).
    #[arg(long)]
    pub grid: Option<String>,
    #[arg(long, value_enum, default_value = "json")]
    pub format: Format,
}

#[derive(Debug, Args)]
pub struct Ar1Args {
    /// Training series (`day,temp`).
    #[arg(long, requires = "test", conflicts_with_all = ["input", "synthetic"])]
    pub train: Option<PathBuf>,
    /// Test series (`day,temp`).
    #[arg(long, requires = "train")]
    pub test: Option<PathBuf>,
    /// Single series split into training and test parts at `--split-day`.
    #[arg(long, conflicts_with = "synthetic")]
    pub input: Option<PathBuf>,
    /// First test day; defaults to the middle of the day range.
    #[arg(long, requires = "input")]
    pub split_day: Option<i64>,
    /// Generate the series instead of reading it; the first half of the
    /// days is used for training.
    #[arg(long)]
    pub synthetic: bool,
    #[arg(long, default_value_t = 0.77)]
    pub alpha: f64,
    #[arg(long, default_value_t = 2.97)]
    pub sigma: f64,
    /// Five seasonal coefficients: mean, cos, sin, cos 2x, sin 2x.
    #[arg(
        long,
        default_value = "13.2,-10.7,-3.1,-0.6,0.03",
        allow_hyphen_values = true
    )]
    pub beta: String,
    #[arg(long, default_value_t = 7300)]
    pub days: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// `start:stop:step` or a comma-separated list.
    #[arg(long, default_value = "0:10:1", allow_hyphen_values = true)]
    pub thresholds: String,
    #[arg(long, default_value_t = 10)]
    pub bins: usize,
    #[arg(long, value_enum, default_value = "json")]
    pub format: Format,
}
