use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch in {op}: {}x{} vs {}x{}", left.0, left.1, right.0, right.1)]
    DimensionMismatch {
        op: &'static str,
        left: (usize, usize),
        right: (usize, usize),
    },

    #[error("invalid shape: {0}")]
    Shape(String),

    #[error("singular value iteration did not converge within {sweeps} sweeps")]
    NoConvergence { sweeps: usize },

    #[error("invalid target rank k={k}: expected 1 <= k <= {max}")]
    InvalidRank { k: usize, max: usize },

    #[error("invalid sketch width s={s}: expected 1 <= s <= {max}")]
    InvalidSketchWidth { s: usize, max: usize },

    #[error("range basis is empty: every sketch column is numerically zero")]
    EmptyRange,

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("{}: {msg} (byte offset {offset})", path.display())]
    Format {
        path: PathBuf,
        offset: u64,
        msg: String,
    },

    #[error("{}: {source}", path.display())]
    File {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn mismatch(
        op: &'static str,
        left: (usize, usize),
        right: (usize, usize),
    ) -> Self {
        Error::DimensionMismatch { op, left, right }
    }

    /// True for failures of the numerical core rather than of I/O or input validation.
    pub fn is_numerical(&self) -> bool {
        matches!(self, Error::NoConvergence { .. } | Error::EmptyRange)
    }

    pub fn is_io(&self) -> bool {
        matches!(self, Error::Format { .. } | Error::File { .. } | Error::Io(_))
    }
}
