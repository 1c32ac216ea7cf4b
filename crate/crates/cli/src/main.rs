//! `susy-eta`: run catalogue examples, the spectral-singularity probe and the
//! residual suite. Exit code 0 = all checks pass, 1 = check failure, 2 = bad configuration.

mod commands;
mod config;
mod output;

use clap::{Parser, Subcommand};
use config::{ConfigError, ExperimentConfig, Overrides};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "susy-eta", version, about = "Quasi-Hermitian metrics from supersymmetric ladder operators")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Full pipeline for a catalogue entry (`constant`, `poschl-teller`).
    Example {
        name: String,
        #[arg(long)]
        config: Option<PathBuf>,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// cond(rho), r_h and resolvent agreement along a d sequence approaching 0.
    Probe {
        #[arg(long)]
        config: Option<PathBuf>,
        /// Comma-separated d values, e.g. `-1,-0.5,-0.25`.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        d_sequence: Option<Vec<f64>>,
        #[arg(long, default_value = "constant")]
        entry: String,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Residual suite from a config file.
    Verify {
        config: PathBuf,
        #[command(flatten)]
        overrides: Overrides,
    },
}

fn load(path: Option<&PathBuf>, fallback: &str) -> Result<ExperimentConfig, ConfigError> {
    match path {
        Some(p) => ExperimentConfig::load(p),
        None => Ok(ExperimentConfig::example(fallback)),
    }
}

fn run(cli: Cli) -> Result<Result<bool, commands::RunError>, ConfigError> {
    match cli.command {
        Command::Example { name, config, overrides } => {
            let mut cfg = load(config.as_ref(), &name)?;
            cfg.entry = name;
            cfg.apply(&overrides);
            let grid = cfg.validate()?;
            Ok(commands::example(&cfg, &grid))
        }
        Command::Probe { config, d_sequence, entry, overrides } => {
            let mut cfg = load(config.as_ref(), &entry)?;
            if config.is_none() {
                cfg.entry = entry;
            }
            cfg.apply(&overrides);
            if let Some(ds) = d_sequence {
                cfg.probe.d_sequence = ds;
            }
            let grid = cfg.validate()?;
            Ok(commands::probe(&cfg, &grid))
        }
        Command::Verify { config, overrides } => {
            let mut cfg = ExperimentConfig::load(&config)?;
            cfg.apply(&overrides);
            let grid = cfg.validate()?;
            Ok(commands::verify(&cfg, &grid))
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
        Ok(Err(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
        Ok(Ok(true)) => ExitCode::SUCCESS,
        Ok(Ok(false)) => ExitCode::from(1),
    }
}
