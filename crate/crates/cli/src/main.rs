//! `sramlab`: run netlists and the canned SRAM, noise-margin and sweep
//! experiments, writing plot-ready CSV and JSON plus a `manifest.json`.
//!
//! Exit codes: 0 on success, 1 on a simulation or I/O error, 2 on a usage error.

mod commands;
mod error;
mod output;
mod sizing;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use crate::error::CliError;
use crate::output::Output;

/// Parse a number with an optional SPICE suffix (`2n`, `10f`, `1.5k`).
pub(crate) fn parse_value(s: &str) -> Result<f64, String> {
    sramlab_core::netlist::parse_number(s).ok_or_else(|| format!("malformed number '{s}'"))
}

#[derive(Debug, Parser)]
#[command(
    name = "sramlab",
    version,
    about = "Circuit simulation for SRAM and adiabatic charging experiments"
)]
struct Cli {
    /// Output directory.
    #[arg(long, short, global = true, env = "SRAMLAB_OUT", default_value = "sramlab-out")]
    out: PathBuf,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Execute the analyses of a netlist file.
    Run(commands::run::RunArgs),
    /// Compare conventional and adiabatic supplies on a 6T cell.
    Sram(commands::sram::SramArgs),
    /// Butterfly curves and static noise margin.
    Snm(commands::snm::SnmArgs),
    /// Repeat an experiment over one parameter.
    Sweep(commands::sweep::SweepArgs),
}

fn execute(cli: &Cli) -> Result<(), CliError> {
    let mut out = Output::create(&cli.out)?;
    let config = match &cli.command {
        Command::Run(a) => commands::run::run(a, &mut out)?,
        Command::Sram(a) => commands::sram::run(a, &mut out)?,
        Command::Snm(a) => commands::snm::run(a, &mut out)?,
        Command::Sweep(a) => commands::sweep::run(a, &mut out)?,
    };
    let dir = out.dir().to_path_buf();
    out.finish(config)?;
    eprintln!("outputs in {}", dir.display());
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match execute(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
