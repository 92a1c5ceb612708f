//! `rough-dot` command-line driver.

mod args;
mod commands;
mod error;
mod manifest;
mod plots;
mod specs;

use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::Parser;

use args::{Cli, Command};
use error::CliError;

fn main() -> ExitCode {
    let argv: Vec<String> = std::env::args().collect();
    match run(argv) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            if !e.message().is_empty() {
                eprintln!("error: {}", e.message());
            }
            ExitCode::from(e.exit_code())
        }
    }
}

fn run(argv: Vec<String>) -> Result<(), CliError> {
    let cli = match Cli::try_parse_from(&argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => Ok(()),
                _ => Err(CliError::Usage),
            };
        }
    };
    init_logging(&cli.log_level);
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(CliError::param("--threads must be at least 1"));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::param(format!("thread pool: {e}")))?;
    }
    dispatch(cli, argv[1..].to_vec())
}

fn init_logging(level: &str) {
    let _ = env_logger::Builder::new()
        .parse_filters(level)
        .format_timestamp(None)
        .try_init();
}

/// Runs one parsed command and records its manifest.
pub(crate) fn dispatch(cli: Cli, args: Vec<String>) -> Result<(), CliError> {
    if let Command::Replay(r) = &cli.command {
        return manifest::replay(r);
    }
    let outcome = commands::execute(&cli.command)?;
    let record = manifest::Manifest::new(manifest::recorded_args(&args), &outcome)?;
    let path = cli
        .manifest
        .clone()
        .unwrap_or_else(|| manifest::default_location(outcome.out.as_deref()));
    record.write(&path)?;
    if outcome.failed {
        return Err(CliError::Numerical(String::new()));
    }
    Ok(())
}
