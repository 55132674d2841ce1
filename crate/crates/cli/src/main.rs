//! `sapi` — experiment driver for spatially adaptive projective integration
//! on stiff hyperbolic balance laws.

mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use commands::CmdError;
use config::ExperimentConfig;

#[derive(Parser)]
#[command(
    name = "sapi",
    about = "Spatially adaptive projective integration workbench",
    version
)]
struct Cli {
    /// Output directory for CSV artifacts.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,

    /// Seed for randomized sweeps (stability map sample jitter).
    #[arg(long, global = true, default_value_t = 1)]
    seed: u64,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Numerical spectrum of the semi-discrete operator plus its analytic
    /// cluster disks; verifies containment.
    Spectrum {
        #[arg(long)]
        config: PathBuf,
    },
    /// Eigenvalues and spectral radius of the configured transition matrix.
    Transition {
        #[arg(long)]
        config: PathBuf,
    },
    /// Closed-form parameter selection and stability-region report.
    Stability {
        #[arg(long)]
        config: PathBuf,
        /// Boundary samples per stability disk in the stability map.
        #[arg(long, default_value_t = 64)]
        samples: usize,
    },
    /// Time-march a (nonlinear) problem and write solution snapshots.
    Simulate {
        #[arg(long)]
        config: PathBuf,
    },
    /// Step-count speedup table over the three reference scenarios.
    Speedup,
}

fn load(path: &PathBuf) -> Result<ExperimentConfig, CmdError> {
    ExperimentConfig::load(path).map_err(|e| CmdError {
        code: 2,
        message: e.to_string(),
    })
}

fn run(cli: &Cli) -> Result<(), CmdError> {
    match &cli.command {
        Command::Spectrum { config } => commands::cmd_spectrum(&load(config)?, &cli.out),
        Command::Transition { config } => commands::cmd_transition(&load(config)?, &cli.out),
        Command::Stability { config, samples } => {
            commands::cmd_stability(&load(config)?, &cli.out, *samples, cli.seed)
        }
        Command::Simulate { config } => commands::cmd_simulate(&load(config)?, &cli.out),
        Command::Speedup => commands::cmd_speedup(&cli.out),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}
