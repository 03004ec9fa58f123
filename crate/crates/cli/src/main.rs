//! `staf`: experiment driver for state-following kernel approximation.

use std::fmt;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use staf_core::StafError;

mod commands;
mod config;

use config::Overrides;

#[derive(Debug, Parser)]
#[command(
    name = "staf",
    version,
    about = "State-following kernel approximation experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Gradient Chase along the circular trajectory; writes a CSV trace.
    Chase(RunArgs),
    /// Online actor-critic regulator run; writes a CSV trace.
    Adp(RunArgs),
    /// Sup-error table for the kernel-sum approximation of y^alpha.
    Monomial {
        /// Multi-index, comma separated, e.g. `2,1`.
        #[arg(long, value_delimiter = ',', required = true)]
        alpha: Vec<u32>,
        /// Scales m, comma separated.
        #[arg(long = "m", value_delimiter = ',', default_value = "100,200,400")]
        scales: Vec<u32>,
        /// Ball radius.
        #[arg(long = "r", default_value_t = 0.1)]
        radius: f64,
    },
    /// Prints the center-count bound C(n + N + S, N + S).
    Bound {
        n: u64,
        #[arg(value_name = "N")]
        degree: u64,
        #[arg(value_name = "S")]
        shift_degree: u64,
    },
}

#[derive(Debug, Args)]
struct RunArgs {
    /// TOML file with [centers], [chase] and [adp] sections.
    #[arg(long)]
    config: Option<PathBuf>,
    /// CSV destination; stdout when omitted.
    #[arg(long)]
    out: Option<String>,
    #[arg(long)]
    dt: Option<f64>,
    #[arg(long)]
    total_time: Option<f64>,
    /// Gradient steps per time step (chase only).
    #[arg(long)]
    inner_iters: Option<usize>,
    /// Initial state, two values.
    #[arg(long, num_args = 2, allow_negative_numbers = true)]
    x0: Option<Vec<f64>>,
    /// Seed for the excitation phases (adp only).
    #[arg(long)]
    seed: Option<u64>,
    /// Report value and control errors against the known optimum (adp only).
    #[arg(long)]
    gt_override: Option<bool>,
}

impl RunArgs {
    fn split(self) -> (Option<PathBuf>, Overrides) {
        let overrides = Overrides {
            out: self.out,
            dt: self.dt,
            total_time: self.total_time,
            inner_iterations: self.inner_iters,
            x0: self.x0,
            seed: self.seed,
            ground_truth: self.gt_override,
        };
        (self.config, overrides)
    }
}

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Runtime(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 1,
            CliError::Runtime(_) => 2,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(msg) => write!(f, "config error: {msg}"),
            CliError::Runtime(msg) => write!(f, "run aborted: {msg}"),
        }
    }
}

impl From<StafError> for CliError {
    fn from(e: StafError) -> Self {
        match e {
            StafError::InvalidParameter(_)
            | StafError::DimensionMismatch { .. }
            | StafError::NoCenters
            | StafError::WeightOverflow { .. }
            | StafError::BinomialOverflow { .. } => CliError::Config(e.to_string()),
            _ => CliError::Runtime(e.to_string()),
        }
    }
}

fn run(command: Command) -> Result<(), CliError> {
    match command {
        Command::Chase(args) => {
            let (path, overrides) = args.split();
            let file = config::load(path.as_deref())?;
            commands::chase(config::chase_setup(file, overrides)?)
        }
        Command::Adp(args) => {
            let (path, overrides) = args.split();
            if overrides.inner_iterations.is_some() {
                return Err(CliError::Config(
                    "--inner-iters applies only to chase".into(),
                ));
            }
            let file = config::load(path.as_deref())?;
            commands::adp(config::adp_setup(file, overrides)?)
        }
        Command::Monomial {
            alpha,
            scales,
            radius,
        } => commands::monomial(alpha, scales, radius),
        Command::Bound {
            n,
            degree,
            shift_degree,
        } => commands::bound(n, degree, shift_degree),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("staf: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
