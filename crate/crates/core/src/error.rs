use std::path::PathBuf;

use thiserror::Error;

/// Errors raised by the simulator.
///
/// Variants fall into two groups: configuration errors (bad parameters,
/// violated preconditions) and runtime errors (I/O, serialization). The CLI
/// maps the first group to exit status 2 and the second to exit status 1.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid time grid: {0}")]
    InvalidGrid(String),

    #[error("invalid noise parameters: {0}")]
    InvalidNoise(String),

    #[error("expected {expected} noise, got {found}")]
    WrongNoiseKind {
        expected: &'static str,
        found: &'static str,
    },

    #[error("OU recursion unstable: dt = {dt} must be below 1/(2 gamma) = {limit}")]
    Unstable { dt: f64, limit: f64 },

    #[error("purity {0} outside [0, 1]")]
    InvalidPurity(f64),

    #[error("decoherence value {0} has modulus above 1")]
    DecoherenceOutOfRange(f64),

    #[error("invalid qubit state: {0}")]
    InvalidState(String),

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("invalid experiment configuration: {0}")]
    InvalidConfig(String),

    #[error("seed index {0} exceeds 32 bits")]
    SeedIndexOverflow(u64),

    #[error("eigendecomposition failed to converge")]
    Eigen,

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("serialization error: {0}")]
    Serialize(String),

    #[error("interrupted")]
    Interrupted,
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// True for errors caused by invalid user input rather than a failure
    /// while running.
    pub fn is_usage(&self) -> bool {
        matches!(
            self,
            Error::InvalidGrid(_)
                | Error::InvalidNoise(_)
                | Error::WrongNoiseKind { .. }
                | Error::Unstable { .. }
                | Error::InvalidPurity(_)
                | Error::InvalidConfig(_)
                | Error::SeedIndexOverflow(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
