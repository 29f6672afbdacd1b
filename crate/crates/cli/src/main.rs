//! `xqr` command-line driver.

mod args;
mod commands;

use std::fs;
use std::process::ExitCode;

use clap::Parser;

use args::{Cli, Command};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Core(#[from] xqr::Error),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) | CliError::Core(xqr::Error::InvalidArgument(_)) => 2,
            CliError::Core(xqr::Error::Io { .. }) => 3,
            CliError::Core(xqr::Error::Csv { .. } | xqr::Error::Json(_) | xqr::Error::InvalidTable(_)) => 4,
            CliError::Core(_) => 1,
        }
    }
}

const EXIT_NOT_CONVERGED: u8 = 5;

fn run(cli: &Cli) -> Result<commands::Outcome, CliError> {
    fs::create_dir_all(&cli.output).map_err(|source| xqr::Error::Io {
        path: cli.output.clone(),
        source,
    })?;
    let out = cli.output.as_path();
    match &cli.command {
        Command::Generate(a) => commands::generate(a, out),
        Command::Fit(a) => commands::fit_table(a, out),
        Command::Ensemble(a) => commands::ensemble(a, out),
        Command::SinDemo(a) => commands::sin_demo(a, out),
        Command::NoiseSweep(a) => commands::noise_sweep(a, out),
        Command::ShadowStudy(a) => commands::shadow_study(a, out),
        Command::Resources(a) => commands::resources(a, out),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(outcome) => {
            for path in &outcome.written {
                println!("wrote {}", path.display());
            }
            match outcome.not_converged {
                Some(reason) => {
                    eprintln!("error: {reason}");
                    ExitCode::from(EXIT_NOT_CONVERGED)
                }
                None => ExitCode::SUCCESS,
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
