use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use coordination::coord_sim::{Scheme, DEFAULT_SEED};
use coordination::settings::SettingId;

#[derive(Debug, Parser)]
#[command(name = "coord", version, about = "Empirical coordination over channels with feedback")]
pub struct Cli {
    /// Add wall-clock time to the report (breaks byte-identical reruns).
    #[arg(long, global = true)]
    pub timing: bool,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check the problem's decomposition for its setting.
    Validate(FileArgs),
    /// Information constraint of an auxiliary-free setting, with its verdict.
    Evaluate(EvaluateArgs),
    /// Maximize the objective of a setting with an auxiliary variable.
    Optimize(OptimizeArgs),
    /// Monte-Carlo run of the block-Markov scheme.
    Simulate(SimulateArgs),
    /// The binary source over a binary symmetric channel.
    #[command(subcommand)]
    Example(ExampleCommand),
}

#[derive(Debug, Args)]
pub struct FileArgs {
    pub file: PathBuf,
    /// Use this setting instead of the one in the file.
    #[arg(long = "setting-override", alias = "setting", value_parser = parse_setting)]
    pub setting: Option<SettingId>,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    #[command(flatten)]
    pub file: FileArgs,
    /// Rate margin for the rate window, in bits.
    #[arg(long, default_value_t = 0.01, allow_negative_numbers = true)]
    pub delta: f64,
}

#[derive(Debug, Args)]
pub struct OptimizeArgs {
    #[command(flatten)]
    pub file: FileArgs,
    /// Auxiliary alphabet size (default |U||X||Y||V| + 2).
    #[arg(long)]
    pub cardinality: Option<usize>,
    #[arg(long)]
    pub restarts: Option<usize>,
    /// Also run the exhaustive search with this grid denominator.
    #[arg(long, value_name = "GRID")]
    pub grid_oracle: Option<usize>,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum SchemeArg {
    GenericW,
    WEqualsX,
}

impl From<SchemeArg> for Scheme {
    fn from(s: SchemeArg) -> Self {
        match s {
            SchemeArg::GenericW => Scheme::GenericW,
            SchemeArg::WEqualsX => Scheme::WEqualsX,
        }
    }
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub file: FileArgs,
    #[arg(long, default_value_t = 100)]
    pub n: usize,
    #[arg(long, default_value_t = 10)]
    pub blocks: usize,
    #[arg(long, default_value_t = 20)]
    pub trials: usize,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    #[arg(long, default_value_t = 0.01, allow_negative_numbers = true)]
    pub delta: f64,
    /// Rate in bits per symbol (default: middle of the rate window).
    #[arg(long, allow_negative_numbers = true)]
    pub rate: Option<f64>,
    #[arg(long, value_enum, default_value = "w-equals-x")]
    pub scheme: SchemeArg,
    /// Coordination tolerance in total variation.
    #[arg(long, default_value_t = 0.2, allow_negative_numbers = true)]
    pub coord_tol: f64,
    /// Typicality tolerance (default: half the coordination tolerance).
    #[arg(long, allow_negative_numbers = true)]
    pub typ_tol: Option<f64>,
    #[arg(long, default_value_t = 4096)]
    pub max_messages: usize,
    /// Auxiliary alphabet size for the generic scheme.
    #[arg(long)]
    pub cardinality: Option<usize>,
    /// Write the first session's symbols as CSV.
    #[arg(long, value_name = "PATH")]
    pub trace: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum ExampleCommand {
    /// Coordination and lossy constraints against alpha.
    Curve {
        #[arg(long, default_value_t = 0.1, allow_negative_numbers = true)]
        epsilon: f64,
        #[arg(long, default_value_t = 100)]
        grid: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Smallest alpha with a positive constraint; a sweep over epsilon
    /// when no epsilon is given.
    AlphaStar {
        #[arg(long, allow_negative_numbers = true)]
        epsilon: Option<f64>,
        #[arg(long, default_value_t = 100)]
        grid: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Problem file for the given parameters.
    EmitProblem {
        #[arg(long, allow_negative_numbers = true)]
        alpha: f64,
        #[arg(long, allow_negative_numbers = true)]
        epsilon: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn parse_setting(s: &str) -> Result<SettingId, String> {
    s.replace('-', "_").parse()
}
