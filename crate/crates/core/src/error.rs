use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    /// Rows and columns are 1-based, matching what a user sees in an editor.
    #[error("parse error at row {row}, column {col}: {msg}")]
    Parse { row: usize, col: usize, msg: String },

    #[error("non-finite value at row {row}, column {col}")]
    NonFinite { row: usize, col: usize },

    #[error("empty matrix")]
    EmptyMatrix,

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// Carries the best bracket `[lower, upper]` on the quantity being solved for.
    #[error("no convergence after {iters} iterations; value bracketed in [{lower:e}, {upper:e}]")]
    NonConvergence { iters: usize, lower: f64, upper: f64 },

    #[error("singular system: {0}")]
    Singular(String),

    #[error("mu-complexity is unbounded for this data (one-sided); pass an explicit mu to override")]
    MuUnbounded,

    #[error("non-finite objective during optimization at iteration {iter}")]
    Diverged { iter: usize, last: Vec<f64> },

    #[error("serialization error: {0}")]
    Serde(#[from] serde_json::Error),
}

impl Error {
    /// Process exit code: 2 for usage or input problems, 3 when the guarantee
    /// does not apply (unbounded mu), 4 for numerical failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::MuUnbounded => 3,
            Error::NonConvergence { .. } | Error::Singular(_) | Error::Diverged { .. } => 4,
            _ => 2,
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
