use std::path::PathBuf;

use caliper_match::MatchError;
use thiserror::Error;

/// Everything the command line can fail with. Each variant maps to one of
/// the documented exit codes through [`CliError::exit_code`].
#[derive(Debug, Error)]
pub enum CliError {
    #[error("{path}: line {line}: {message}")]
    Input {
        path: PathBuf,
        line: u64,
        message: String,
    },

    #[error("{path}: {message}")]
    Table { path: PathBuf, message: String },

    #[error("caliper file {path}: line {line}: {message}")]
    CaliperFile {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("{0}")]
    Usage(String),

    #[error(transparent)]
    Match(#[from] MatchError),

    #[error("cannot read {path}: {source}")]
    Read {
        path: PathBuf,
        source: std::io::Error,
    },

    #[error("cannot write {path}: {source}")]
    Write {
        path: PathBuf,
        source: std::io::Error,
    },
}

/// Exit status for success.
pub const EXIT_OK: i32 = 0;
/// Exit status for I/O failures (unreadable input, unwritable output).
pub const EXIT_IO: i32 = 1;
/// Exit status for invalid input: malformed CSV or caliper file, bad flags,
/// uncertified caliper for the mode, unequal groups for complete matching.
pub const EXIT_INVALID: i32 = 2;
/// Exit status when the requested pair count cannot be reached.
pub const EXIT_INFEASIBLE: i32 = 3;

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Match(MatchError::Infeasible { .. }) => EXIT_INFEASIBLE,
            CliError::Read { .. } | CliError::Write { .. } => EXIT_IO,
            _ => EXIT_INVALID,
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
