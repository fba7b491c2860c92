//! Command-line front end: argument parsing, config resolution, report output.
//!
//! Exit codes: 0 on success, 2 for usage or parameter errors, 3 when the
//! requested configuration is numerically unsafe, 1 for anything else.

pub mod commands;
pub mod config;

use std::ffi::OsString;
use std::io::Write;
use std::path::Path;

use clap::{Parser, Subcommand};
use serde::Serialize;

use crate::commands::{CycleArgs, DistinguishArgs, SearchArgs, SpectrumArgs, SweepArgs};
use crate::config::ExperimentConfig;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Parser)]
#[command(
    name = "luders",
    version,
    about = "Lüders-measurement search simulator"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Repeated membership tests on one register.
    Cycle(CycleArgs),
    /// Full binary search for the marked record.
    Search(SearchArgs),
    /// Search failure rate over a range of trials per cycle, as CSV.
    Sweep(SweepArgs),
    /// Eigenvalue groups of the symmetrized observable.
    Spectrum(SpectrumArgs),
    /// Discriminate the identity from a slightly deformed observable.
    Distinguish(DistinguishArgs),
}

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Core(luders_core::Error),
    Io(std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        use luders_core::Error as E;
        match self {
            CliError::Usage(_) => 2,
            CliError::Core(e) if e.is_numerical() => 3,
            CliError::Core(e) => {
                let mut root = e;
                while let E::Trial { source, .. } = root {
                    root = source;
                }
                match root {
                    E::Param(_) | E::Dimension(_) => 2,
                    _ => 1,
                }
            }
            CliError::Io(_) => 1,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "{m}"),
            CliError::Core(e) => write!(f, "{e}"),
            CliError::Io(e) => write!(f, "i/o error: {e}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<luders_core::Error> for CliError {
    fn from(e: luders_core::Error) -> Self {
        CliError::Core(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e)
    }
}

/// Top-level JSON report.
#[derive(Debug, Serialize)]
pub struct Report<R: Serialize> {
    pub schema_version: u32,
    pub config: ExperimentConfig,
    pub results: R,
    pub timing_ms: f64,
}

impl<R: Serialize> Report<R> {
    pub fn new(config: ExperimentConfig, results: R, started: std::time::Instant) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            config,
            results,
            timing_ms: started.elapsed().as_secs_f64() * 1e3,
        }
    }

    pub fn to_json(&self) -> Result<String, CliError> {
        let mut s = serde_json::to_string_pretty(self)
            .map_err(|e| CliError::Io(std::io::Error::other(e)))?;
        s.push('\n');
        Ok(s)
    }
}

/// Writes to `path`, or stdout when absent.
pub fn emit(text: &str, path: Option<&Path>) -> Result<(), CliError> {
    match path {
        Some(p) => std::fs::write(p, text)?,
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())?;
            out.flush()?;
        }
    }
    Ok(())
}

pub fn execute(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Cycle(a) => commands::cycle(a),
        Command::Search(a) => commands::search(a),
        Command::Sweep(a) => commands::sweep(a),
        Command::Spectrum(a) => commands::spectrum(a),
        Command::Distinguish(a) => commands::distinguish(a),
    }
}

/// Parses `args` (including the program name), runs, and returns the exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match execute(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
