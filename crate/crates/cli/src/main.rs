//! `qprobe`: figure data, estimator studies and validation suites.
//!
//! Exit status: 0 on success, 1 when a validation suite fails, 2 on a
//! configuration, input or output error.

mod commands;
mod config;
mod error;
mod output;

use std::process::ExitCode;

use clap::{Parser, Subcommand};

use commands::Status;
use config::{Flags, RunConfig};

#[derive(Parser)]
#[command(name = "qprobe", version, about = "Qubit probes for classical telegraph and 1/f^alpha noise")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// H(τ, γ) surface for random telegraph noise (fig1_surface).
    RtnQfi(Flags),
    /// Optimal interaction time against γ with its approximation (fig2_staircase).
    OptimalTime(Flags),
    /// Colored-noise QSNR surface, profiles and N_max (fig3, fig4, fig5).
    ColoredScan(Flags),
    /// Fluctuator count maximizing the QFI for each α (fig5_nmax).
    NmaxScan(Flags),
    /// Closed-form D(τ, γ) against the Monte Carlo average.
    McValidate(Flags),
    /// Simulated maximum-likelihood experiments against the Cramér–Rao bound.
    Estimate(Flags),
    /// Full validation suite: oracle, limits, derivatives, Cramér–Rao.
    Validate(Flags),
}

fn run(cli: &Cli) -> Result<commands::Outcome, error::CliError> {
    let (flags, f): (&Flags, fn(&RunConfig) -> _) = match &cli.command {
        Command::RtnQfi(x) => (x, commands::rtn_qfi),
        Command::OptimalTime(x) => (x, commands::optimal_time),
        Command::ColoredScan(x) => (x, commands::colored_scan),
        Command::NmaxScan(x) => (x, commands::nmax),
        Command::McValidate(x) => (x, commands::mc_validate),
        Command::Estimate(x) => (x, commands::estimate),
        Command::Validate(x) => (x, commands::validate),
    };
    f(&RunConfig::resolve(flags)?)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(outcome) => {
            for p in &outcome.written {
                eprintln!("wrote {}", p.display());
            }
            match outcome.status {
                Status::Ok => ExitCode::SUCCESS,
                Status::ValidationFailed => {
                    eprintln!("validation failed");
                    ExitCode::from(1)
                }
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
