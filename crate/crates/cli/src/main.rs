//! `motor-adapt`: simulate, sweep, falsify, uniqueness and fit from the shell.
//!
//! Exit codes: 0 success or pass, 2 invalid input, 3 numeric failure,
//! 4 uniqueness check failed.

mod commands;
mod config;
mod problem;

use std::fmt;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use motor_adapt_core::Error as CoreError;

#[derive(Debug)]
pub enum CliError {
    Input(String),
    Numeric(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Input(_) => 2,
            CliError::Numeric(_) => 3,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Input(m) | CliError::Numeric(m) => f.write_str(m),
        }
    }
}

impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        match e {
            CoreError::NumericOverflow { .. }
            | CoreError::NonContractiveFamily { .. }
            | CoreError::UndefinedFixedPoint => CliError::Numeric(e.to_string()),
            _ => CliError::Input(e.to_string()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    KvTree,
}

#[derive(Debug, Parser)]
#[command(name = "motor-adapt", version, about = "Motor adaptation model toolkit")]
pub struct Cli {
    /// JSON run configuration. Defaults apply when omitted.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Output file, written atomically. Standard output when omitted.
    #[arg(long, global = true, value_name = "PATH")]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// Seed for multi-start fitting.
    #[arg(long, global = true, value_name = "N")]
    seed: Option<u64>,
    /// Config override such as `model.k=25`. Repeatable.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Simulate one protocol and write its trajectory.
    Simulate,
    /// Run clamped errors to convergence and tabulate asymptote and slope.
    Sweep {
        /// Comma-separated error sizes; overrides the config's `errors`.
        #[arg(long)]
        errors: Option<String>,
    },
    /// Check the standard model against the clamped-error features.
    Falsify {
        #[arg(long)]
        errors: Option<String>,
    },
    /// Check which linear update family shares a single asymptote.
    Uniqueness {
        /// Family CSV: `k_ref,<value>` then `e,f,g` rows.
        #[arg(long, value_name = "PATH")]
        family: PathBuf,
        /// Residual tolerance; overrides `analysis.residual_tol`.
        #[arg(long)]
        tol: Option<f64>,
    },
    /// Fit a model to trajectory files listed in a problem file.
    Fit {
        #[arg(long, value_name = "PATH")]
        problem: PathBuf,
        #[arg(long)]
        starts: Option<usize>,
        #[arg(long)]
        max_evals: Option<usize>,
        /// Fit both the standard and coupled models and compare them.
        #[arg(long)]
        compare: bool,
    },
}

/// Whole-file write through a temporary file in the target directory.
pub fn write_atomic(path: &Path, contents: &str) -> Result<(), CliError> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let fail = |e: std::io::Error| CliError::Input(format!("cannot write {}: {e}", path.display()));
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(fail)?;
    tmp.write_all(contents.as_bytes()).map_err(fail)?;
    tmp.persist(path).map_err(|e| fail(e.error))?;
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code())
        }
    }
}
