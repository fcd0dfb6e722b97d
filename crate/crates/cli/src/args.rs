use std::path::PathBuf;

use clap::{ArgAction, Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "levy-exit", version, about = "Mean exit time and escape probability for SDEs driven by α-stable Lévy noise")]
pub struct Cli {
    /// Flat `key = value` file supplying defaults for any long flag.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Worker threads (default: number of logical processors).
    #[arg(long, global = true, value_name = "N")]
    pub threads: Option<usize>,
    /// Increase log verbosity (repeatable).
    #[arg(short, long, global = true, action = ArgAction::Count)]
    pub verbose: u8,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve for the mean exit time on the interior grid.
    SolveMet {
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        solver: SolverArgs,
        #[arg(long, value_name = "FILE")]
        out: PathBuf,
    },
    /// Solve for the escape probability into a target set.
    SolveEp {
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        solver: SolverArgs,
        /// left, right, both, or intervals `lo:hi[,lo:hi...]` (±inf allowed).
        #[arg(long, allow_hyphen_values = true)]
        target: String,
        #[arg(long, value_name = "FILE")]
        out: PathBuf,
    },
    /// Estimate parameters from observed values.
    Estimate(EstimateArgs),
    /// Monte Carlo exit statistics by Euler–Maruyama simulation.
    Simulate(SimulateArgs),
    /// Regenerate the data series behind one of the example figures.
    Figures {
        #[arg(long, value_parser = clap::value_parser!(u8).range(1..=4))]
        which: u8,
        #[arg(long, value_name = "DIR")]
        out: PathBuf,
    },
}

#[derive(Debug, Args)]
pub struct ModelArgs {
    /// Drift f(x) in the expression language, e.g. `x - beta*x^3`.
    #[arg(long, allow_hyphen_values = true)]
    pub drift: String,
    #[arg(long)]
    pub alpha: f64,
    #[arg(long, default_value_t = 1.0)]
    pub epsilon: f64,
    #[arg(long, default_value_t = 0.0)]
    pub d: f64,
    #[arg(long, num_args = 2, value_names = ["A", "B"], required = true, allow_negative_numbers = true)]
    pub domain: Vec<f64>,
    /// Drift parameter value `name=value` (repeatable).
    #[arg(long = "param", value_name = "NAME=VALUE", action = ArgAction::Append, allow_hyphen_values = true)]
    pub params: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SchemeArg {
    Split,
    Simplified,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    Lu,
    Gmres,
}

#[derive(Debug, Args)]
pub struct SolverArgs {
    /// Half the number of grid intervals.
    #[arg(long, default_value_t = 200)]
    pub grid: usize,
    #[arg(long, value_enum, default_value_t = SchemeArg::Simplified)]
    pub scheme: SchemeArg,
    #[arg(long, value_enum, default_value_t = MethodArg::Lu)]
    pub method: MethodArg,
    #[arg(long, default_value_t = 30)]
    pub gmres_restart: usize,
    #[arg(long, default_value_t = 1e-12)]
    pub gmres_tol: f64,
    /// Maximum GMRES restart cycles.
    #[arg(long, default_value_t = 500)]
    pub gmres_max_iter: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum KindArg {
    Met,
    Ep,
}

#[derive(Debug, Args)]
pub struct EstimateArgs {
    #[arg(long, value_name = "FILE")]
    pub obs: PathBuf,
    #[arg(long, value_enum)]
    pub kind: KindArg,
    #[arg(long, allow_hyphen_values = true)]
    pub drift: String,
    /// Free parameter `name:lower:upper` (repeatable).
    #[arg(long, value_name = "NAME:LO:HI", action = ArgAction::Append, required = true, allow_hyphen_values = true)]
    pub free: Vec<String>,
    /// Fixed parameter `name=value` (repeatable).
    #[arg(long, value_name = "NAME=VALUE", action = ArgAction::Append, allow_hyphen_values = true)]
    pub fixed: Vec<String>,
    /// Domain; inferred from uniformly spaced observations when omitted.
    #[arg(long, num_args = 2, value_names = ["A", "B"], allow_negative_numbers = true)]
    pub domain: Vec<f64>,
    /// Target set for escape-probability observations.
    #[arg(long, allow_hyphen_values = true)]
    pub target: Option<String>,
    /// Use only observations in this central fraction of the domain; 1 keeps
    /// all of them.
    #[arg(long, default_value_t = 0.9)]
    pub window: f64,
    #[command(flatten)]
    pub solver: SolverArgs,
    /// Scalar bracket tolerance.
    #[arg(long, default_value_t = 1e-4)]
    pub xtol: f64,
    /// Start points per axis for multi-parameter estimation.
    #[arg(long, default_value_t = 3)]
    pub multistart: usize,
    /// Forward solves per estimation (one parameter) or per start.
    #[arg(long, default_value_t = 200)]
    pub max_evals: usize,
    #[arg(long, value_name = "FILE")]
    pub out: PathBuf,
    /// Also write every optimizer probe to this file.
    #[arg(long, value_name = "FILE")]
    pub trace: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    /// File of starting points, one per line.
    #[arg(long, value_name = "FILE", conflicts_with = "x0", required_unless_present = "x0")]
    pub x0_list: Option<PathBuf>,
    #[arg(long, allow_negative_numbers = true)]
    pub x0: Option<f64>,
    #[arg(long, default_value_t = 10_000)]
    pub paths: usize,
    #[arg(long, default_value_t = 1e-4)]
    pub dt: f64,
    #[arg(long, default_value_t = 100.0)]
    pub max_time: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Report landing frequencies in this target instead of exit times.
    #[arg(long, allow_hyphen_values = true)]
    pub target: Option<String>,
    #[arg(long, value_name = "FILE")]
    pub out: PathBuf,
}
