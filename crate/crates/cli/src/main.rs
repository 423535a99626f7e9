use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use hsearch_core::{Family, Preset, SearchError};

mod commands;
mod output;
mod settings;

use settings::List;

/// Simulate and verify the generalized continuous-time quantum search Hamiltonian.
#[derive(Debug, Parser)]
#[command(name = "hsearch", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Target probability and reduced amplitudes on a uniform time grid.
    Simulate(SimulateArgs),
    /// Read-out time T and P(T), printed as `T=<v> P=<v>`.
    Readout(ReadoutArgs),
    /// P(T) and T across a grid of coupling phases.
    SweepPhase(SweepArgs),
    /// Read-out time against N for a Hamiltonian family, with a log-log fit.
    Scaling(ScalingArgs),
    /// Random-initialization, multi-target trials on the full-space integrator.
    Trials(TrialsArgs),
    /// Run the acceptance checks; exits 1 if any criterion fails.
    Verify(VerifyArgs),
}

#[derive(Debug, Clone, Args)]
pub struct IoArgs {
    /// Flat `key = value` file; explicit flags take precedence.
    #[arg(long, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Output file (default: standard output).
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
    #[arg(long, value_name = "csv|json")]
    pub format: Option<Format>,
}

#[derive(Debug, Clone, Args)]
pub struct ParamArgs {
    /// farhi | fenner | perfect | new; individual coefficient flags override it.
    #[arg(long)]
    pub preset: Option<Preset>,
    #[arg(long, allow_negative_numbers = true)]
    pub energy: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub a: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub d: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub r: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub phi: Option<f64>,
}

#[derive(Debug, Clone, Args)]
pub struct ProblemArgs {
    /// Overlap x = <w|s> of the reduced problem.
    #[arg(long, allow_negative_numbers = true, conflicts_with = "n")]
    pub overlap: Option<f64>,
    /// Full-space dimension, uniform initial state.
    #[arg(long)]
    pub n: Option<usize>,
    /// Number of marked states, indices 0..k (with --n).
    #[arg(long)]
    pub targets: Option<usize>,
}

#[derive(Debug, Clone, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub params: ParamArgs,
    #[command(flatten)]
    pub problem: ProblemArgs,
    /// End of the time grid (default: two read-out times).
    #[arg(long)]
    pub t_max: Option<f64>,
    /// Number of samples, both endpoints included.
    #[arg(long)]
    pub steps: Option<usize>,
    /// Integrate the full N-dimensional system instead (needs --n).
    #[arg(long)]
    pub oracle: bool,
    #[arg(long)]
    pub ode_tol: Option<f64>,
    #[command(flatten)]
    pub io: IoArgs,
}

#[derive(Debug, Clone, Args)]
pub struct ReadoutArgs {
    #[command(flatten)]
    pub params: ParamArgs,
    #[command(flatten)]
    pub problem: ProblemArgs,
    /// Take P(T) from the full-space integrator (needs --n).
    #[arg(long)]
    pub oracle: bool,
    #[arg(long)]
    pub ode_tol: Option<f64>,
    #[command(flatten)]
    pub io: IoArgs,
}

#[derive(Debug, Clone, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub params: ParamArgs,
    #[command(flatten)]
    pub problem: ProblemArgs,
    #[arg(long)]
    pub points: Option<usize>,
    #[arg(long, allow_negative_numbers = true)]
    pub phi_min: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub phi_max: Option<f64>,
    #[command(flatten)]
    pub io: IoArgs,
}

#[derive(Debug, Clone, Args)]
pub struct ScalingArgs {
    /// farhi | fenner | perfect_fixed_r | new
    #[arg(long)]
    pub family: Option<Family>,
    /// Comma-separated dimensions, e.g. 4,16,64.
    #[arg(long)]
    pub n_list: Option<List<usize>>,
    #[arg(long)]
    pub energy: Option<f64>,
    #[command(flatten)]
    pub io: IoArgs,
}

#[derive(Debug, Clone, Args)]
pub struct TrialsArgs {
    #[command(flatten)]
    pub params: ParamArgs,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub targets: Option<usize>,
    #[arg(long)]
    pub trials: Option<usize>,
    /// Defaults to $HSEARCH_SEED, then 42.
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub ode_tol: Option<f64>,
    #[command(flatten)]
    pub io: IoArgs,
}

#[derive(Debug, Clone, Args)]
pub struct VerifyArgs {
    /// Criterion keys or numbers, comma-separated.
    #[arg(long)]
    pub only: Option<List<String>>,
    /// Replaces every residual threshold.
    #[arg(long)]
    pub tolerance: Option<f64>,
    /// Seed of the random-initialization trials (defaults to $HSEARCH_SEED, then 42).
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Write the report here instead of standard output.
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
    #[arg(long, value_name = "csv|json")]
    pub format: Option<Format>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

impl std::str::FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            other => Err(format!("unknown format '{other}' (expected csv or json)")),
        }
    }
}

#[derive(Debug)]
pub enum CliError {
    /// Bad flags, config or inputs: exit 2.
    Usage(String),
    /// The computation itself failed: exit 1.
    Numerical(String),
    /// `verify` ran but some criterion failed: exit 1, report already printed.
    Failed,
}

impl From<SearchError> for CliError {
    fn from(e: SearchError) -> Self {
        match e {
            SearchError::SingularDenominator(_)
            | SearchError::NoOscillation(_)
            | SearchError::IntegratorDriftExceeded(_)
            | SearchError::StepSizeUnderflow(_) => CliError::Numerical(e.to_string()),
            _ => CliError::Usage(e.to_string()),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Simulate(a) => commands::simulate(&a),
        Command::Readout(a) => commands::readout(&a),
        Command::SweepPhase(a) => commands::sweep_phase(&a),
        Command::Scaling(a) => commands::scaling(&a),
        Command::Trials(a) => commands::trials(&a),
        Command::Verify(a) => commands::verify(&a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Usage(msg)) => {
            eprintln!("hsearch: {msg}");
            ExitCode::from(2)
        }
        Err(CliError::Numerical(msg)) => {
            eprintln!("hsearch: {msg}");
            ExitCode::from(1)
        }
        Err(CliError::Failed) => ExitCode::from(1),
    }
}
