//! Command-line surface.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(
    name = "riskx",
    version,
    about = "Second-order risk expansions of the MLE under α-divergence loss",
    after_help = "Exit codes: 0 success, 2 usage or validation error, 3 numeric failure."
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evaluate c1/n + c2/n² on a grid of θ, α and n.
    #[command(args_override_self = true)]
    Expand(ExpandArgs),
    /// Report the geometric invariants, analytic and/or Monte-Carlo.
    #[command(args_override_self = true)]
    Geometry(GeometryArgs),
    /// Estimate the risk by simulation and compare with the expansion.
    #[command(args_override_self = true)]
    Simulate(SimulateArgs),
    /// Count index-contraction loops and print the polynomial in p.
    #[command(args_override_self = true)]
    Loops(LoopsArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModelKind {
    Multinomial,
    Normal,
    Mixture,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Jsonl,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PatternKind {
    NormalTt,
    NormalTdtd,
    Custom,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum InfiniteMode {
    /// Average finite replicates and report the infinite count.
    Exclude,
    /// Any infinite replicate makes the mean infinite.
    Propagate,
}

#[derive(Debug, Clone, Args)]
pub struct ModelArgs {
    #[arg(long, value_enum)]
    pub model: ModelKind,
    /// Multinomial cell probabilities m1,…,mp (m0 = 1 − Σ).
    #[arg(long, allow_hyphen_values = true)]
    pub probs: Option<String>,
    /// Normal dimension p.
    #[arg(long)]
    pub dim: Option<usize>,
    /// Normal covariance, p×p entries row-major, comma-separated [default: identity].
    #[arg(long, allow_hyphen_values = true)]
    pub cov: Option<String>,
    /// Mixture component variance σ².
    #[arg(long)]
    pub sigma2: Option<f64>,
    /// Grid for θ₁ (mixture) or m₁ (binomial): values and/or ranges a:b:step.
    #[arg(long, allow_hyphen_values = true)]
    pub theta_grid: Option<String>,
}

#[derive(Debug, Clone, Args)]
pub struct OutputArgs {
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    /// Write to a file instead of stdout.
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// Significant digits for reals (1–15). Each printed value is the
    /// rounded number itself, so cells re-parse to exactly what is shown.
    #[arg(long, default_value_t = 6, value_parser = clap::value_parser!(u8).range(1..=15))]
    pub precision: u8,
    /// Worker threads [default: available parallelism].
    #[arg(long, value_parser = clap::value_parser!(u16).range(1..))]
    pub workers: Option<u16>,
    /// Key-value file mirroring these flags (`key = value`); flags win.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct ExpandArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    /// α values: list and/or ranges a:b:step.
    #[arg(long, allow_hyphen_values = true, default_value = "-1")]
    pub alpha: String,
    /// Sample sizes, comma-separated.
    #[arg(long, default_value = "10")]
    pub n: String,
    /// Monte-Carlo draws for families without closed forms.
    #[arg(long, default_value_t = crate::geometry::DEFAULT_MC_SAMPLES)]
    pub mc_samples: usize,
    #[arg(long, env = "RISKX_SEED", default_value_t = 1)]
    pub seed: u64,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct GeometryArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long, allow_hyphen_values = true, default_value = "-1")]
    pub alpha: String,
    #[arg(long, default_value_t = crate::geometry::DEFAULT_MC_SAMPLES)]
    pub mc_samples: usize,
    #[arg(long, env = "RISKX_SEED", default_value_t = 1)]
    pub seed: u64,
    /// Skip the Monte-Carlo rows.
    #[arg(long)]
    pub no_mc: bool,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long, allow_hyphen_values = true, default_value = "-1")]
    pub alpha: String,
    #[arg(long, default_value = "10")]
    pub n: String,
    #[arg(long, default_value_t = 10_000)]
    pub reps: usize,
    #[arg(long, env = "RISKX_SEED", default_value_t = 1)]
    pub seed: u64,
    #[arg(long, value_enum, default_value_t = InfiniteMode::Exclude)]
    pub infinite: InfiniteMode,
    /// Second normal covariance: run the Σ-invariance comparison against --cov.
    #[arg(long, allow_hyphen_values = true)]
    pub compare_cov: Option<String>,
    /// Monte-Carlo draws for the mixture expansion column.
    #[arg(long, default_value_t = crate::geometry::DEFAULT_MC_SAMPLES)]
    pub mc_samples: usize,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct LoopsArgs {
    #[arg(long, value_enum)]
    pub pattern: PatternKind,
    /// Pattern description for `--pattern custom`.
    #[arg(long)]
    pub pattern_file: Option<PathBuf>,
    #[command(flatten)]
    pub output: OutputArgs,
}

impl Command {
    pub fn output(&self) -> &OutputArgs {
        match self {
            Command::Expand(a) => &a.output,
            Command::Geometry(a) => &a.output,
            Command::Simulate(a) => &a.output,
            Command::Loops(a) => &a.output,
        }
    }
}
