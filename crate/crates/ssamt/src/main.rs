use std::process::ExitCode;

use clap::Parser;
use ssamt::cli::{merge_config, Cli, Command};
use ssamt::commands;

fn run() -> anyhow::Result<()> {
    let args = merge_config(std::env::args_os().collect())?;
    let cli = Cli::parse_from(args);
    match &cli.command {
        Command::Denoise(a) => commands::denoise(a),
        Command::Impute(a) => commands::impute(a),
        Command::Test(a) => commands::test(a),
        Command::Simulate(a) => commands::simulate(a),
    }
}

fn main() -> ExitCode {
    match run() {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
