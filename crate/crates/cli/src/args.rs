use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use ltmax_core::deviation::Direction;
use ltmax_core::forcing::ForcingParams;
use ltmax_core::walk::Mode;
use serde::{Deserialize, Serialize};

pub const DEFAULT_SEED: u64 = 20261015;

#[derive(Parser, Debug)]
#[command(
    name = "ltmax",
    version,
    about = "Maximum local time of simple random walk on Z^d (d >= 3): simulations and checks",
    args_override_self = true
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Green function at the origin, escape probability gamma_d and alpha_d
    Constants(ConstantsArgs),
    /// One- and two-point local time laws against their geometric/exponential forms
    Laws(LawsArgs),
    /// Number of sites above the threshold, with its path representation and moments
    Count(CountArgs),
    /// Upward or downward deviation probability of the maximum local time
    Tail(TailArgs),
    /// Centred maximum at beta = 1 against the Gumbel limit
    Gumbel(GumbelArgs),
    /// Forcing traces: inclusion, holding-time law and the weighted sampler
    Forcing(ForcingArgs),
    /// Visits per segment of the jump skeleton
    Segments(SegmentArgs),
    /// Resume an interrupted count or tail run
    CheckpointResume(ResumeArgs),
}

impl Command {
    pub fn common(&self) -> &Common {
        match self {
            Command::Constants(a) => &a.common,
            Command::Laws(a) => &a.common,
            Command::Count(a) => &a.common,
            Command::Tail(a) => &a.common,
            Command::Gumbel(a) => &a.common,
            Command::Forcing(a) => &a.common,
            Command::Segments(a) => &a.common,
            Command::CheckpointResume(a) => &a.common,
        }
    }
}

#[derive(Args, Debug, Clone)]
pub struct Common {
    /// Master seed; replicate r draws from the stream (seed, r)
    #[arg(long, env = "LTMAX_SEED", default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    /// Worker threads, 0 for one per core
    #[arg(long, env = "LTMAX_THREADS", default_value_t = 0)]
    pub threads: usize,
    /// Output directory
    #[arg(long, default_value = "ltmax-out")]
    pub out: PathBuf,
    /// File of `key = value` lines supplying defaults; command-line flags win
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Do not write SVG plots
    #[arg(long)]
    pub no_plot: bool,
    #[arg(long, hide = true)]
    pub stop_after_chunks: Option<u64>,
}

impl Default for Common {
    fn default() -> Self {
        Self {
            seed: DEFAULT_SEED,
            threads: 0,
            out: PathBuf::from("ltmax-out"),
            config: None,
            no_plot: false,
            stop_after_chunks: None,
        }
    }
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModeArg {
    Discrete,
    Continuous,
}

impl From<ModeArg> for Mode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Discrete => Mode::Discrete,
            ModeArg::Continuous => Mode::Continuous,
        }
    }
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DirArg {
    Up,
    Down,
}

impl From<DirArg> for Direction {
    fn from(d: DirArg) -> Self {
        match d {
            DirArg::Up => Direction::Up,
            DirArg::Down => Direction::Down,
        }
    }
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
pub struct ConstantsArgs {
    /// Dimensions, 3 to 8
    #[arg(long, value_delimiter = ',', default_value = "3")]
    pub d: Vec<usize>,
    /// Monte Carlo replicates for gamma_d (0 skips the check)
    #[arg(long, default_value_t = 0)]
    pub mc_reps: u64,
    /// Step horizon of each Monte Carlo return search
    #[arg(long, default_value_t = 1_000_000)]
    pub mc_horizon: u64,
    #[command(flatten)]
    #[serde(skip)]
    pub common: Common,
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
pub struct LawsArgs {
    #[arg(long, default_value_t = 3)]
    pub d: usize,
    #[arg(long, value_enum, default_value_t = ModeArg::Discrete)]
    pub mode: ModeArg,
    /// Second site, comma separated (two-point law); omitted for the origin law
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub y: Option<Vec<i64>>,
    /// Steps simulated per sample; later visits are dropped
    #[arg(long, default_value_t = 1_000_000)]
    pub truncation: u64,
    #[arg(long, default_value_t = 100_000)]
    pub reps: u64,
    /// Tail levels compared with the closed form
    #[arg(long, value_delimiter = ',', default_value = "1,2,3,4,5,6,7,8,9,10")]
    pub levels: Vec<f64>,
    #[command(flatten)]
    #[serde(skip)]
    pub common: Common,
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
pub struct CountArgs {
    #[arg(long, default_value_t = 3)]
    pub d: usize,
    /// Step horizons (comma separated)
    #[arg(long, value_delimiter = ',', default_value = "1000")]
    pub n: Vec<u64>,
    /// Threshold scale, beta > 1
    #[arg(long, default_value_t = 1.2)]
    pub beta: f64,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub u: f64,
    #[arg(long, default_value_t = 1000)]
    pub reps: u64,
    /// Checkpoint file (default: <out>/count.checkpoint.json)
    #[arg(long)]
    #[serde(skip)]
    pub checkpoint: Option<PathBuf>,
    #[command(flatten)]
    #[serde(skip)]
    pub common: Common,
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
pub struct TailArgs {
    #[arg(long, default_value_t = 3)]
    pub d: usize,
    #[arg(long, value_enum, default_value_t = ModeArg::Discrete)]
    pub mode: ModeArg,
    #[arg(long = "dir", value_enum, default_value_t = DirArg::Up)]
    pub direction: DirArg,
    /// beta >= 1 upward, 0 < beta <= 1 downward
    #[arg(long, default_value_t = 1.2)]
    pub beta: f64,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub u: f64,
    /// Step horizon (discrete mode)
    #[arg(long)]
    pub n: Option<u64>,
    /// Time horizon (continuous mode)
    #[arg(long)]
    pub t: Option<f64>,
    #[arg(long, default_value_t = 10_000)]
    pub reps: u64,
    /// Checkpoint file (default: <out>/tail.checkpoint.json)
    #[arg(long)]
    #[serde(skip)]
    pub checkpoint: Option<PathBuf>,
    #[command(flatten)]
    #[serde(skip)]
    pub common: Common,
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
pub struct GumbelArgs {
    #[arg(long, default_value_t = 3)]
    pub d: usize,
    /// Time horizons
    #[arg(long, value_delimiter = ',', default_value = "1000,10000")]
    pub t: Vec<f64>,
    #[arg(long, default_value_t = 1000)]
    pub reps: u64,
    #[command(flatten)]
    #[serde(skip)]
    pub common: Common,
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
pub struct ForcingArgs {
    #[arg(long, default_value_t = 3)]
    pub d: usize,
    /// Downward scale, 0 < beta <= 1
    #[arg(long, default_value_t = 0.9)]
    pub beta: f64,
    #[arg(long, default_value_t = 10_000)]
    pub n: u64,
    /// Holding-time budget; needs exp(2 gamma eta) < 1 + delta/2
    #[arg(long, default_value_t = ForcingParams::DEFAULT_ETA)]
    pub eta: f64,
    /// Window exponent, 1 - beta/2 < kappa < 1
    #[arg(long, default_value_t = ForcingParams::DEFAULT_KAPPA)]
    pub kappa: f64,
    #[arg(long, default_value_t = ForcingParams::DEFAULT_DELTA)]
    pub delta: f64,
    #[arg(long, default_value_t = 1000)]
    pub traces: u64,
    /// Replicates of the weighted and naive estimates of P(B) (0 skips them)
    #[arg(long, default_value_t = 0)]
    pub weighted_reps: u64,
    #[command(flatten)]
    #[serde(skip)]
    pub common: Common,
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
pub struct SegmentArgs {
    #[arg(long, default_value_t = 3)]
    pub d: usize,
    #[arg(long, default_value_t = 0.9)]
    pub beta: f64,
    /// Segment length exponent, beta2 < beta1 < beta
    #[arg(long, default_value_t = 0.5)]
    pub beta1: f64,
    /// Needs 2 beta1 / d < beta2 < beta1
    #[arg(long, default_value_t = 0.4)]
    pub beta2: f64,
    #[arg(long, default_value_t = ForcingParams::DEFAULT_KAPPA)]
    pub kappa: f64,
    #[arg(long, default_value_t = 10_000)]
    pub n: u64,
    #[arg(long, default_value_t = 1000)]
    pub reps: u64,
    #[command(flatten)]
    #[serde(skip)]
    pub common: Common,
}

#[derive(Args, Debug, Clone)]
pub struct ResumeArgs {
    /// Checkpoint written by an interrupted count or tail run
    #[arg(long)]
    pub checkpoint: PathBuf,
    #[command(flatten)]
    pub common: Common,
}
