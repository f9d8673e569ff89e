use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("index out of range: {what}")]
    Index { what: String },

    #[error("invalid grid: {0}")]
    Grid(String),

    #[error("invalid parameter: {0}")]
    Parameter(String),

    /// Parameters are valid numbers but outside the regime where the
    /// rescaled value equation is well posed.
    #[error("regime violation: {0}")]
    Regime(String),

    #[error("singular system: zero pivot at row {row}")]
    Singular { row: usize },

    #[error("no traveling wave found: {0}")]
    NoWave(String),

    #[error("fit window on the right tail is empty")]
    InsufficientTail,

    #[error("no convergence after {iterations} iterations (last residual {residual:e})")]
    NonConvergence {
        iterations: usize,
        residual: f64,
        history: Vec<f64>,
        last: Option<Box<crate::wave::CoupledSolution>>,
    },

    #[error("I/O error on {path}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {msg}")]
    Format { path: PathBuf, msg: String },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit code used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::NonConvergence { .. } | Error::NoWave(_) | Error::Singular { .. } => 2,
            Error::Io { .. } | Error::Format { .. } => 4,
            Error::Dimension { .. }
            | Error::Index { .. }
            | Error::Grid(_)
            | Error::Parameter(_)
            | Error::Regime(_)
            | Error::InsufficientTail => 3,
        }
    }
}
