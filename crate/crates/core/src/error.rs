use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// The initial-state coefficients do not describe a density matrix.
    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("invalid probability distribution: {0}")]
    InvalidDistribution(String),

    /// A phase-specific routine was called for a bath in the other phase.
    #[error("phase mismatch: expected {expected}, bath is {actual}")]
    PhaseMismatch {
        expected: &'static str,
        actual: &'static str,
    },

    #[error("invariant violated: {0}")]
    InvariantViolation(String),

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{}: {source}", path.display())]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },
}

impl Error {
    /// Process exit code for the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::InvalidParameter(_) | Error::InvalidState(_) => 2,
            Error::InvalidDistribution(_)
            | Error::PhaseMismatch { .. }
            | Error::InvariantViolation(_) => 3,
            Error::Io { .. } | Error::Csv { .. } => 1,
        }
    }
}
