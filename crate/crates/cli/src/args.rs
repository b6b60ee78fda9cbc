use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "jumpvex", version, about = "Jump-diffusion pricing and shape analysis")]
pub struct Cli {
    /// Re-run the command recorded in a manifest.
    #[arg(long, value_name = "MANIFEST")]
    pub replay: Option<PathBuf>,

    /// Directory for output files and the run manifest.
    #[arg(long, global = true, value_name = "DIR")]
    pub out_dir: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Option<Command>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Price a contract by finite differences or Monte Carlo.
    Price(PriceArgs),
    /// Sample the structural conditions of a model.
    Check(CheckArgs),
    /// Solve and test every time slice for convexity.
    Convexity(ConvexityArgs),
    /// Test whether one model prices below another.
    Compare(CompareArgs),
    /// Probe the generator on convex quartic test functions.
    Lcp(LcpArgs),
    /// Price a put under the bump-jump model and exhibit its non-convexity.
    Counterexample(CounterexampleArgs),
    /// Replace an infinite-activity label measure by a finite window.
    Truncate(TruncateArgs),
    /// Bermudan prices on a ladder of exercise dates.
    Bermudan(BermudanArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    Fd,
    Mc,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SpacingArg {
    Uniform,
    Geometric,
}

#[derive(Debug, Clone, Args, Default)]
pub struct GridArgs {
    /// Smallest x node.
    #[arg(long)]
    pub x_min: Option<f64>,
    /// Largest x node.
    #[arg(long)]
    pub x_max: Option<f64>,
    /// Number of x nodes.
    #[arg(long)]
    pub n_x: Option<usize>,
    /// Number of time nodes, including both ends.
    #[arg(long)]
    pub n_t: Option<usize>,
    /// Spacing of the x nodes.
    #[arg(long, value_enum)]
    pub spacing: Option<SpacingArg>,
}

#[derive(Debug, Clone, Args, Default)]
pub struct SchemeArgs {
    /// Simpson panels for the label integral.
    #[arg(long)]
    pub z_nodes: Option<usize>,
    /// Initial time steps split into two halves.
    #[arg(long)]
    pub startup_steps: Option<usize>,
}

#[derive(Debug, Clone, Args, Default)]
pub struct McArgs {
    /// Monte Carlo path count.
    #[arg(long)]
    pub paths: Option<usize>,
    /// Euler steps per path.
    #[arg(long)]
    pub steps: Option<usize>,
    /// Random seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Use mirrored Gaussian pairs.
    #[arg(long)]
    pub antithetic: bool,
}

#[derive(Debug, Args)]
pub struct PriceArgs {
    /// Model JSON file.
    #[arg(long)]
    pub model: PathBuf,
    /// Payoff, e.g. `call:K=1`, `put:K=1`, `linear:a=1,b=0` or `pwl:0.8:0.2,1:0,1.3:0.3`.
    #[arg(long)]
    pub payoff: String,
    /// Initial state.
    #[arg(long)]
    pub x0: f64,
    /// Maturity.
    #[arg(long = "T", alias = "horizon")]
    pub horizon: f64,
    /// Finite differences or Monte Carlo.
    #[arg(long, value_enum)]
    pub method: MethodArg,
    #[command(flatten)]
    pub grid: GridArgs,
    #[command(flatten)]
    pub scheme: SchemeArgs,
    #[command(flatten)]
    pub mc: McArgs,
    /// Skip the step-doubling error estimate (fd).
    #[arg(long)]
    pub no_error_estimate: bool,
    /// Number of simulated paths written to paths.csv (mc).
    #[arg(long, default_value_t = 16)]
    pub dump_paths: usize,
}

#[derive(Debug, Args)]
pub struct CheckArgs {
    /// Model JSON file.
    #[arg(long)]
    pub model: PathBuf,
    /// Sampling horizon.
    #[arg(long = "T", alias = "horizon", default_value_t = 1.0)]
    pub horizon: f64,
    /// Comma-separated x samples (default: 241 geometric points on [0.05, 20]).
    #[arg(long, value_delimiter = ',')]
    pub x: Option<Vec<f64>>,
    /// Comma-separated time samples (default: 5 points on [0, T]).
    #[arg(long, value_delimiter = ',')]
    pub t: Option<Vec<f64>>,
    /// Comma-separated label samples (default: quadrature nodes of the measure).
    #[arg(long, value_delimiter = ',')]
    pub z: Option<Vec<f64>>,
}

#[derive(Debug, Args)]
pub struct ConvexityArgs {
    /// Model JSON file.
    #[arg(long)]
    pub model: PathBuf,
    /// Payoff, e.g. `call:K=1`, `put:K=1`, `linear:a=1,b=0` or `pwl:0.8:0.2,1:0,1.3:0.3`.
    #[arg(long)]
    pub payoff: String,
    /// Maturity.
    #[arg(long = "T", alias = "horizon")]
    pub horizon: f64,
    /// Grid anchor (default: the payoff's strike, else 1).
    #[arg(long)]
    pub x0: Option<f64>,
    /// Absolute tolerance (default: 1e-6 · max |u|).
    #[arg(long)]
    pub tolerance: Option<f64>,
    #[command(flatten)]
    pub grid: GridArgs,
    #[command(flatten)]
    pub scheme: SchemeArgs,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    /// Model expected to price higher.
    #[arg(long)]
    pub model_hi: PathBuf,
    /// Model expected to price lower.
    #[arg(long)]
    pub model_lo: PathBuf,
    /// Payoff, e.g. `call:K=1`, `put:K=1`, `linear:a=1,b=0` or `pwl:0.8:0.2,1:0,1.3:0.3`.
    #[arg(long)]
    pub payoff: String,
    /// Maturity.
    #[arg(long = "T", alias = "horizon")]
    pub horizon: f64,
    /// Finite differences or Monte Carlo.
    #[arg(long, value_enum, default_value = "fd")]
    pub method: MethodArg,
    /// Grid anchor and default Monte Carlo point.
    #[arg(long)]
    pub x0: Option<f64>,
    /// Comma-separated Monte Carlo start points.
    #[arg(long, value_delimiter = ',')]
    pub x: Option<Vec<f64>>,
    #[command(flatten)]
    pub grid: GridArgs,
    #[command(flatten)]
    pub scheme: SchemeArgs,
    #[command(flatten)]
    pub mc: McArgs,
}

#[derive(Debug, Args)]
pub struct LcpArgs {
    /// Model JSON file.
    #[arg(long)]
    pub model: PathBuf,
    /// Comma-separated probe points.
    #[arg(long, value_delimiter = ',', required = true)]
    pub x: Vec<f64>,
    /// Comma-separated probe times.
    #[arg(long, value_delimiter = ',', default_value = "0")]
    pub t: Vec<f64>,
    /// Comma-separated widths of the quartic test functions.
    #[arg(long, value_delimiter = ',', default_value = "0.05,0.1,0.2")]
    pub widths: Vec<f64>,
    /// Simpson panels for the label integral.
    #[arg(long)]
    pub z_nodes: Option<usize>,
}

#[derive(Debug, Args)]
pub struct CounterexampleArgs {
    /// Maturity.
    #[arg(long = "T", alias = "horizon", default_value_t = 1.0)]
    pub horizon: f64,
    #[command(flatten)]
    pub grid: GridArgs,
    #[command(flatten)]
    pub mc: McArgs,
}

#[derive(Debug, Args)]
pub struct TruncateArgs {
    /// Model JSON file.
    #[arg(long)]
    pub model: PathBuf,
    /// Truncation level; labels are restricted to [1/n, n].
    #[arg(long)]
    pub n: u32,
    /// `geom:a,b,count`, `uniform:a,b,count` or a comma-separated list.
    #[arg(long)]
    pub x_grid: String,
    /// Output model file; an explicit `--out-dir` replaces its directory.
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub z_intervals: Option<usize>,
    /// Comma-separated times at which the jump size is tabulated.
    #[arg(long, value_delimiter = ',')]
    pub t_grid: Option<Vec<f64>>,
}

#[derive(Debug, Args)]
pub struct BermudanArgs {
    /// Model JSON file.
    #[arg(long)]
    pub model: PathBuf,
    /// Payoff, e.g. `call:K=1`, `put:K=1`, `linear:a=1,b=0` or `pwl:0.8:0.2,1:0,1.3:0.3`.
    #[arg(long)]
    pub payoff: String,
    /// Maturity.
    #[arg(long = "T", alias = "horizon")]
    pub horizon: f64,
    /// Comma-separated exercise times; each must be a grid time.
    #[arg(long, value_delimiter = ',', required = true)]
    pub dates: Vec<f64>,
    /// Initial state.
    #[arg(long)]
    pub x0: Option<f64>,
    #[command(flatten)]
    pub grid: GridArgs,
    #[command(flatten)]
    pub scheme: SchemeArgs,
}
