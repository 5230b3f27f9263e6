//! Error type shared by the core pipeline stages.

use alloc::string::String;
use core::fmt;

/// Errors produced by the core pipeline.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Error {
    /// A precondition on an argument was violated (bad index, wrong length,
    /// out-of-range parameter).
    Argument(String),
    /// Channel estimation failed (e.g. the least-squares system is
    /// rank-deficient for the requested midamble/length combination).
    Estimation(String),
    /// A numeric routine failed to converge or produced non-finite values.
    Numeric(String),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Argument(msg) => write!(f, "argument error: {msg}"),
            Error::Estimation(msg) => write!(f, "estimation error: {msg}"),
            Error::Numeric(msg) => write!(f, "numeric error: {msg}"),
        }
    }
}

#[cfg(test)]
impl std::error::Error for Error {}

/// Convenience alias used throughout the crate.
pub type Result<T> = core::result::Result<T, Error>;
