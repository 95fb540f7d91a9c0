//! Library half of the `ssa` command-line tool.
//!
//! Every command takes a resolved [`RunConfig`] and writes its results to
//! files; `main.rs` only parses arguments and maps errors to exit codes.

pub mod bench;
pub mod bootstrap;
pub mod commands;
pub mod config;
pub mod models;
pub mod output;

use std::fmt;

pub use config::{BenchTarget, Cli, Command, RunConfig};

/// Exit code for usage and validation errors.
pub const EXIT_USAGE: i32 = 2;
/// Exit code for numerical failures (non-convergence, rank deficiency, ...).
pub const EXIT_NUMERICAL: i32 = 3;

/// Version tag written into every JSON file.
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    pub fn usage(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_USAGE,
            message: message.into(),
        }
    }

    pub fn numerical(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_NUMERICAL,
            message: message.into(),
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl std::error::Error for CliError {}

impl From<ssa_core::Error> for CliError {
    fn from(e: ssa_core::Error) -> Self {
        match e {
            ssa_core::Error::InvalidArgument(_) | ssa_core::Error::ResourceLimit { .. } => {
                Self::usage(e.to_string())
            }
            _ => Self::numerical(e.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        Self::usage(format!("i/o error: {e}"))
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

/// Runs one command to completion.
pub fn run(config: &RunConfig) -> CliResult<()> {
    match config.command.as_str() {
        "decompose" => commands::cmd_decompose(config),
        "reconstruct" => commands::cmd_reconstruct(config),
        "hmatrix" => commands::cmd_hmatrix(config),
        "bench" => bench::cmd_bench(config).map(|_| ()),
        "bootstrap-ci" => bootstrap::cmd_bootstrap_ci(config).map(|_| ()),
        other => Err(CliError::usage(format!("unknown command {other:?}"))),
    }
}
