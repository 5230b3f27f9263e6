//! Application error type with stable process exit codes.

use std::fmt;
use std::path::Path;

/// Errors surfaced by the command-line pipeline, one variant per exit code.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum AppError {
    /// Bad configuration or arguments (exit 2).
    Config(String),
    /// Malformed data file (exit 3).
    Format(String),
    /// Numeric failure in a pipeline stage (exit 4).
    Numeric(String),
    /// Filesystem failure (exit 5).
    Io(String),
}

impl AppError {
    pub fn exit_code(&self) -> i32 {
        match self {
            AppError::Config(_) => 2,
            AppError::Format(_) => 3,
            AppError::Numeric(_) => 4,
            AppError::Io(_) => 5,
        }
    }

    /// Prefix the message with the pipeline stage that failed.
    pub fn in_stage(self, stage: &str) -> AppError {
        match self {
            AppError::Config(m) => AppError::Config(format!("{stage}: {m}")),
            AppError::Format(m) => AppError::Format(format!("{stage}: {m}")),
            AppError::Numeric(m) => AppError::Numeric(format!("{stage}: {m}")),
            AppError::Io(m) => AppError::Io(format!("{stage}: {m}")),
        }
    }
}

impl fmt::Display for AppError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AppError::Config(m) => write!(f, "configuration error: {m}"),
            AppError::Format(m) => write!(f, "format error: {m}"),
            AppError::Numeric(m) => write!(f, "numeric error: {m}"),
            AppError::Io(m) => write!(f, "i/o error: {m}"),
        }
    }
}

impl std::error::Error for AppError {}

impl From<cirsense_core::Error> for AppError {
    fn from(e: cirsense_core::Error) -> Self {
        match e {
            cirsense_core::Error::Argument(m) => AppError::Config(m),
            cirsense_core::Error::Estimation(m) | cirsense_core::Error::Numeric(m) => {
                AppError::Numeric(m)
            }
        }
    }
}

/// Wrap an I/O error with the path it concerns.
pub fn io_error(path: &Path, e: std::io::Error) -> AppError {
    AppError::Io(format!("{}: {e}", path.display()))
}

pub type Result<T> = std::result::Result<T, AppError>;
