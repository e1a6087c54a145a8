//! `memdomain`: command-line front end for `memdomain-core`.
//!
//! Exit status is 0 on success, 2 when the configuration is invalid and 1
//! when a computation fails.

mod cli;
mod commands;
mod output;

use std::path::Path;
use std::process::ExitCode;

use clap::Parser;
use thiserror::Error;

use cli::{Cli, Command, FileConfig};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid {key}: {message}")]
    Validation { key: String, message: String },
    #[error("{0}")]
    Compute(String),
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
}

impl CliError {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        CliError::Io { path: path.display().to_string(), source }
    }

    fn exit_code(&self) -> u8 {
        match self {
            CliError::Validation { .. } => 2,
            CliError::Compute(_) | CliError::Io { .. } => 1,
        }
    }
}

fn configure_threads() -> Result<(), CliError> {
    let Ok(raw) = std::env::var("MEMDOMAIN_THREADS") else {
        return Ok(());
    };
    let threads: usize = raw.trim().parse().map_err(|_| CliError::Validation {
        key: "MEMDOMAIN_THREADS".into(),
        message: format!("expected a non-negative integer (0 = auto), got {raw:?}"),
    })?;
    rayon::ThreadPoolBuilder::new().num_threads(threads).build_global().map_err(|e| CliError::Compute(e.to_string()))
}

/// Parsed file plus its display name and raw bytes for the manifest digest.
type LoadedConfig = (FileConfig, Option<(String, Vec<u8>)>);

fn load_config(path: Option<&Path>) -> Result<LoadedConfig, CliError> {
    let Some(path) = path else {
        return Ok((FileConfig::default(), None));
    };
    let bytes = std::fs::read(path).map_err(|e| CliError::Validation {
        key: "config".into(),
        message: format!("cannot read {}: {e}", path.display()),
    })?;
    let text = std::str::from_utf8(&bytes)
        .map_err(|e| CliError::Validation { key: "config".into(), message: e.to_string() })?;
    let file: FileConfig = toml::from_str(text)
        .map_err(|e| CliError::Validation { key: "config".into(), message: format!("{}: {e}", path.display()) })?;
    Ok((file, Some((path.display().to_string(), bytes))))
}

fn run(cli: Cli) -> Result<(), CliError> {
    configure_threads()?;
    let (file, config_input) = load_config(cli.config.as_deref())?;
    let mut ctx = commands::context(file.params.clone().overlay(cli.params), file.run().overlay(cli.run))?;
    if let Some((path, bytes)) = config_input {
        ctx.record_input(path, &bytes);
    }
    match cli.command {
        Command::Bessel(a) => commands::bessel(ctx, file.bessel.overlay(a)),
        Command::Evolve(a) => commands::evolve(ctx, file.evolve.overlay(a)),
        Command::Lifetimes(a) => commands::lifetimes(ctx, file.lifetimes.overlay(a)),
        Command::Figures(a) => commands::figures(ctx, file.figures.overlay(a)),
        Command::Squeeze(a) => commands::squeeze(ctx, file.squeeze.overlay(a)),
        Command::Record(a) => commands::record(ctx, file.record.overlay(a)),
        Command::Recall(a) => commands::recall(ctx, file.recall.overlay(a)),
        Command::ForgetSweep(a) => commands::forget_sweep(ctx, file.forget_sweep.overlay(a)),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let command = cli.command.name();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("memdomain {command}: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
