//! `gaseq`: design non-orthogonal sequence sets and run grant-free access
//! experiments on them.

mod commands;
mod error;
mod files;

use std::path::PathBuf;
use std::process::ExitCode;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};

use error::{CliError, CliResult};

#[derive(Parser, Debug)]
#[command(name = "gaseq", version, about = "Genetic design of non-orthogonal unimodular sequences")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run both GA stages and write a descriptor plus cost traces.
    Design(commands::DesignArgs),
    /// PAPR summary and CCDF of a descriptor or matrix file.
    Papr(commands::PaprArgs),
    /// Known-sparsity recovery transition over a grid of M/N.
    PhaseTransition(commands::TransitionArgs),
    /// Blind activity detection and channel estimation campaign.
    Simulate(commands::SimulateArgs),
    /// Build a baseline sequence set and write it as a matrix file.
    Baseline(commands::BaselineArgs),
}

/// Flags shared by every command.
#[derive(Args, Debug, Clone)]
pub struct Common {
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Worker threads; 0 picks one per core.
    #[arg(long, default_value_t = 0)]
    pub threads: usize,
    /// Output directory, created if missing.
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Calibration {
    Expected,
    Realized,
}

impl From<Calibration> for gaseq_core::cssim::NoiseCalibration {
    fn from(c: Calibration) -> Self {
        match c {
            Calibration::Expected => Self::Expected,
            Calibration::Realized => Self::Realized,
        }
    }
}

/// Inclusive `start:step:stop` range, or a single value.
#[derive(Clone, Debug, PartialEq)]
pub struct Sweep(pub Vec<f64>);

impl FromStr for Sweep {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let parts: Vec<f64> = s
            .split(':')
            .map(|p| p.trim().parse::<f64>().map_err(|e| format!("'{p}': {e}")))
            .collect::<Result<_, _>>()?;
        if parts.iter().any(|x| !x.is_finite()) {
            return Err(format!("'{s}' is not finite"));
        }
        match parts[..] {
            [x] => Ok(Sweep(vec![x])),
            [start, step, stop] => {
                if step <= 0.0 || stop < start {
                    return Err(format!("'{s}' needs a positive step and stop >= start"));
                }
                let count = ((stop - start) / step + 1e-9).floor() as usize + 1;
                if count > 100_000 {
                    return Err(format!("'{s}' has too many points"));
                }
                Ok(Sweep((0..count).map(|i| start + i as f64 * step).collect()))
            }
            _ => Err(format!("'{s}' is neither a value nor start:step:stop")),
        }
    }
}

/// Like [`Sweep`] but every value must be a positive integer.
#[derive(Clone, Debug, PartialEq)]
pub struct CountSweep(pub Vec<usize>);

impl FromStr for CountSweep {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let Sweep(values) = s.parse()?;
        values
            .into_iter()
            .map(|x| {
                if x >= 1.0 && x.fract() == 0.0 {
                    Ok(x as usize)
                } else {
                    Err(format!("'{s}' must contain positive integers only"))
                }
            })
            .collect::<Result<_, _>>()
            .map(CountSweep)
    }
}

fn configure_threads(threads: usize) -> CliResult<()> {
    if threads > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .map_err(|e| CliError::Usage(format!("thread pool: {e}")))?;
    }
    Ok(())
}

fn run(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Design(a) => {
            configure_threads(a.common.threads)?;
            commands::design(&a)
        }
        Command::Papr(a) => {
            configure_threads(a.common.threads)?;
            commands::papr(&a)
        }
        Command::PhaseTransition(a) => {
            configure_threads(a.common.threads)?;
            commands::phase_transition(&a)
        }
        Command::Simulate(a) => {
            configure_threads(a.common.threads)?;
            commands::simulate(&a)
        }
        Command::Baseline(a) => {
            configure_threads(a.common.threads)?;
            commands::baseline(&a)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
