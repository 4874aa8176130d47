mod cli;
mod commands;
mod error;
mod io;
mod output;

use std::process::ExitCode;

use clap::Parser;

use crate::cli::{merge, Cli, Command};
use crate::error::CliResult;

fn run(cli: Cli) -> CliResult<()> {
    let name = cli.command.name();
    match cli.command {
        Command::GpSim(inv) => commands::gp::sim(name, merge(inv)?),
        Command::GpFit(inv) => commands::gp::fit(name, merge(inv)?),
        Command::ArFit(inv) => commands::ts::ar_fit(name, merge(inv)?),
        Command::DlmFit(inv) => commands::ts::dlm_fit(name, merge(inv)?),
        Command::SpatialFit(inv) => commands::spatial::fit(name, merge(inv)?),
        Command::SpeciesFit(inv) => commands::species::fit(name, merge(inv)?),
        Command::SpeciesPredict(inv) => commands::species::predict(name, merge(inv)?),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // Help and version go to stdout with success; usage errors are
            // input errors like any other.
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
