//! Command-line front end: `exact`, `simulate`, `audit`, `transmit` and
//! `teleport`, each producing one deterministic report.
//!
//! Exit codes: 0 on success, 1 for usage, configuration, budget or I/O
//! errors, 2 when the simulator reports an internal invariant violation.

pub mod config;
pub mod emit;
pub mod report;

use std::ffi::OsString;

use thiserror::Error;

pub use config::{parse_config, CommandKind, InputState, OutputFormat, RunConfig};
pub use emit::{emit_report, format_g17, render, render_csv, render_json, CSV_HEADER};
pub use report::{run_command, Payload, Report, TrialRow, THREADS_ENV};

#[derive(Debug, Error)]
pub enum CliError {
    /// `--help` / `--version` output; not a failure.
    #[error("{0}")]
    Help(String),
    #[error("{0}")]
    Usage(String),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Simulation(#[from] epr_cascade::Error),
    #[error("i/o error: {0}")]
    Io(String),
    #[error("internal error: {0}")]
    Internal(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Help(_) => 0,
            CliError::Simulation(e) if e.is_internal() => 2,
            CliError::Internal(_) => 2,
            _ => 1,
        }
    }
}

/// Parses, runs and emits; returns the process exit code.
pub fn main_with_args<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let result = parse_config(argv).and_then(|cfg| {
        let report = run_command(&cfg)?;
        emit_report(&report, cfg.output_format, cfg.output_path.as_deref())
    });
    match result {
        Ok(()) => 0,
        Err(CliError::Help(text)) => {
            print!("{text}");
            0
        }
        Err(CliError::Usage(text)) => {
            eprint!("{text}");
            1
        }
        Err(e) => {
            eprintln!("epr-cascade: {e}");
            e.exit_code()
        }
    }
}
