//! Command-line interface.
//!
//! Exit status is 0 on success, 1 when a statistical run fails (for
//! example a re-simulation error) and 2 for usage or input problems.

mod args;
mod commands;
mod config;

use std::ffi::OsString;
use std::process::ExitCode;

use clap::Parser;

pub use args::Cli;
use args::Command;

use crate::error::Result;

fn dispatch(command: Command) -> Result<()> {
    match command {
        Command::Prior(a) => commands::prior(a),
        Command::PriorLocal(a) => commands::prior_local(a),
        Command::Holdout(a) => commands::holdout(a),
        Command::Power(a) => commands::power(a),
        Command::Calibration(a) => commands::calibration(a),
        Command::Bh(a) => commands::bh(a),
        Command::Simulate(a) => commands::simulate(a),
    }
}

/// Parse `args` (program name first) and run the command.
pub fn run<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(e.exit_code() as u8);
        }
    };
    match dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_usage() { 2 } else { 1 })
        }
    }
}
