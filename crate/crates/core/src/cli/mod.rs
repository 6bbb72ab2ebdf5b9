//! Command-line front end.
//!
//! | exit | meaning |
//! |------|---------|
//! | 0 | success |
//! | 1 | `verify` ran but a residual exceeded its threshold |
//! | 2 | config, override or input-file parse error |
//! | 3 | complex spectrum |
//! | 4 | metric condition cap exceeded |
//! | 5 | any other numerical failure, or an output write error |

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Parser, Subcommand};
use thiserror::Error;

use crate::error::Error;
use crate::io::config::{load_config, parse_config_with, ConfigError, RunConfig};
use crate::io::matrix_file::MatrixFileError;

pub mod pipeline;

/// Environment variable holding the worker-thread cap.
pub const THREADS_ENV: &str = "ETASPEC_THREADS";

#[derive(Debug, Parser)]
#[command(name = "etaspec", version, about = "Physical Hilbert spaces and equivalent Hermitian Hamiltonians for quasi-Hermitian operators")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// TOML run configuration; built-in defaults when omitted.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory; overrides `output_dir` from the config.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// `key=value` applied on top of the config, e.g. `grid.n=401`.
    #[arg(long = "override", value_name = "KEY=VALUE", global = true)]
    pub overrides: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Real spectrum of H (spectrum.csv, spectrum.json).
    Spectrum,
    /// Every structural residual against its threshold (report.json).
    Verify,
    /// Time evolution in both representations (trajectory.csv).
    Evolve,
    /// Equivalent Hermitian Hamiltonian h = ρHρ⁻¹ (h.txt, equivalent.json).
    Equivalent,
}

impl Command {
    pub fn as_str(self) -> &'static str {
        match self {
            Command::Spectrum => "spectrum",
            Command::Verify => "verify",
            Command::Evolve => "evolve",
            Command::Equivalent => "equivalent",
        }
    }
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("{path}: {source}")]
    MatrixFile { path: String, source: MatrixFileError },
    #[error(transparent)]
    Numerical(#[from] Error),
    #[error("cannot write {path}: {message}")]
    Output { path: String, message: String },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::MatrixFile { .. } => 2,
            CliError::Numerical(Error::ComplexSpectrum { .. }) => 3,
            CliError::Numerical(Error::ConditionCapExceeded { .. }) => 4,
            CliError::Numerical(_) | CliError::Output { .. } => 5,
        }
    }
}

/// What a successful run produced.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub files: Vec<PathBuf>,
    pub summary: String,
    /// False only for a `verify` run with a failed threshold.
    pub passed: bool,
}

impl Outcome {
    pub fn exit_code(&self) -> i32 {
        if self.passed {
            0
        } else {
            1
        }
    }
}

/// Value of [`THREADS_ENV`]: unset means one thread.
pub fn threads_from_env() -> Result<Option<usize>, ConfigError> {
    match std::env::var(THREADS_ENV) {
        Err(_) => Ok(None),
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n >= 1 => Ok(Some(n)),
            _ => Err(ConfigError::Invalid(format!("{THREADS_ENV} must be a positive integer, got `{v}`"))),
        },
    }
}

pub fn resolve_config(cli: &Cli) -> Result<RunConfig, ConfigError> {
    match &cli.config {
        Some(path) => load_config(path, &cli.overrides),
        None => parse_config_with("", &cli.overrides),
    }
}

pub fn run(cli: &Cli) -> Result<Outcome, CliError> {
    crate::numcore::set_threads(threads_from_env()?);
    let cfg = resolve_config(cli)?;
    let out = cli
        .out
        .clone()
        .or_else(|| cfg.output_dir.clone())
        .unwrap_or_else(|| PathBuf::from("out"));
    pipeline::execute(cli.command, &cfg, &out)
}

/// Parse `args`, run, report on stdout/stderr, and return the exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match run(&cli) {
        Ok(outcome) => {
            println!("{}", outcome.summary);
            for f in &outcome.files {
                println!("wrote {}", f.display());
            }
            outcome.exit_code()
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
