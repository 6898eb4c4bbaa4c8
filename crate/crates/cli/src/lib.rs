//! Batch driver for the `coordination` library: problem files in, JSON
//! reports and CSV tables out.
//!
//! Exit codes: 0 success, 1 malformed input, 2 infeasible problem or
//! violated precondition, 3 internal or optimizer failure.

pub mod args;
mod commands;
pub mod problem_file;
pub mod report;

use std::ffi::OsString;
use std::io::{self, Write};
use std::time::Instant;

use clap::Parser;
use thiserror::Error;

use crate::args::Cli;
use crate::report::RunReport;

pub const EXIT_OK: i32 = 0;
pub const EXIT_MALFORMED: i32 = 1;
pub const EXIT_INFEASIBLE: i32 = 2;
pub const EXIT_INTERNAL: i32 = 3;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{path}: {reason}")]
    Malformed { path: String, reason: String },

    #[error("invalid value for --{flag}: {reason}")]
    Flag { flag: &'static str, reason: String },

    #[error("cannot read {path}: {source}")]
    Read { path: String, source: io::Error },

    #[error("cannot write {path}: {source}")]
    Write { path: String, source: io::Error },

    #[error("{0}")]
    Usage(String),

    #[error(transparent)]
    Core(#[from] coordination::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        use coordination::Error as E;
        match self {
            CliError::Malformed { .. } | CliError::Flag { .. } | CliError::Read { .. } | CliError::Usage(_) => {
                EXIT_MALFORMED
            }
            CliError::Write { .. } => EXIT_INTERNAL,
            CliError::Core(e) => match e {
                E::Domain(_) | E::ZeroTrials => EXIT_MALFORMED,
                E::Inadmissible { .. }
                | E::NoAuxiliary(_)
                | E::NeedsAuxiliary(_)
                | E::SizeGuard { .. }
                | E::RateWindowEmpty { .. }
                | E::CodebookTooLarge { .. } => EXIT_INFEASIBLE,
                _ => EXIT_INTERNAL,
            },
        }
    }
}

/// What a command prints, and how it exits.
pub(crate) enum Output {
    Report(RunReport),
    /// A table or file body printed as is.
    Text(String),
}

pub(crate) struct Outcome {
    pub output: Output,
    pub code: i32,
    /// Explanation printed on stderr alongside a nonzero code.
    pub message: Option<String>,
}

impl Outcome {
    pub fn ok(output: Output) -> Self {
        Self {
            output,
            code: EXIT_OK,
            message: None,
        }
    }
}

/// Runs one command line, printing to `out` and `err`; returns the exit code.
pub fn run<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let argv: Vec<OsString> = argv.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&argv) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let _ = write!(err, "{e}");
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{e}");
                    EXIT_OK
                }
                _ => EXIT_MALFORMED,
            };
        }
    };
    let echo: Vec<String> = argv.iter().skip(1).map(|a| a.to_string_lossy().into_owned()).collect();
    let start = Instant::now();
    match commands::dispatch(&cli, echo) {
        Ok(mut outcome) => {
            let printed = match &mut outcome.output {
                Output::Report(r) => {
                    if cli.timing {
                        r.wall_time_seconds = Some(start.elapsed().as_secs_f64());
                    }
                    report::to_json(r) + "\n"
                }
                Output::Text(t) => std::mem::take(t),
            };
            if let Some(m) = &outcome.message {
                let _ = writeln!(err, "error: {m}");
            }
            if out.write_all(printed.as_bytes()).is_err() {
                return EXIT_INTERNAL;
            }
            outcome.code
        }
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}
