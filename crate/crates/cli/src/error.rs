use std::path::{Path, PathBuf};
use std::process::ExitCode;

use knotwork_core::Error as CoreError;
use thiserror::Error;

pub type CliResult<T> = Result<T, CliError>;

/// Exit status of the command-line tool.
///
/// | code | meaning |
/// |------|---------|
/// | 0 | success |
/// | 2 | unreadable or malformed input (files, records, bundles, model files) |
/// | 3 | invalid configuration, flags or hyperparameters; model and bundle disagree |
/// | 4 | training failed (solver did not converge, non-finite loss, degenerate data) |
/// | 5 | `compare` finished but some models failed and their cells are missing |
#[derive(Debug, Error)]
pub enum CliError {
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },

    #[error("{0}")]
    Input(String),

    #[error("{0}")]
    Config(String),

    #[error(transparent)]
    Core(#[from] CoreError),

    #[error("{missing} comparison cells missing; failed models: {}", failed.join(", "))]
    MissingCells { missing: usize, failed: Vec<String> },
}

impl CliError {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.to_path_buf(),
            source,
        }
    }

    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Io { .. } | CliError::Input(_) => 2,
            CliError::Config(_) => 3,
            CliError::Core(e) => match e {
                CoreError::FieldCount { .. }
                | CoreError::NotNumeric { .. }
                | CoreError::EmptyLabel { .. }
                | CoreError::UnknownLabel(_) => 2,
                CoreError::Empty(_)
                | CoreError::DimensionMismatch { .. }
                | CoreError::InvalidConfig(_)
                | CoreError::SampleTooLarge { .. } => 3,
                CoreError::TooComplex { .. }
                | CoreError::NonFinite { .. }
                | CoreError::ZeroDirection
                | CoreError::NotDescent(_)
                | CoreError::LineSearchFailed(_)
                | CoreError::SingleClass
                | CoreError::NoConvergence { .. } => 4,
            },
            CliError::MissingCells { .. } => 5,
        }
    }
}

impl From<CliError> for ExitCode {
    fn from(e: CliError) -> Self {
        ExitCode::from(e.exit_code())
    }
}
