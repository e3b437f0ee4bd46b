use std::path::PathBuf;

use thiserror::Error;

/// Result alias used throughout the crate.
pub type Result<T> = std::result::Result<T, MxError>;

#[derive(Debug, Error)]
pub enum MxError {
    #[error("unsupported element format: {0}")]
    UnsupportedFormat(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("extent {extent} along axis {axis} is not divisible by group size {group_size}")]
    Divisibility {
        axis: isize,
        extent: usize,
        group_size: usize,
    },

    #[error("NaN or infinite input at element {index}")]
    NanInput { index: usize },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("unsupported path: {0}")]
    UnsupportedPath(String),

    #[error("unsupported dimension {0}: must be a power of two")]
    UnsupportedDimension(usize),

    #[error("summary is empty: all {undefined} entries are undefined")]
    EmptySummary { undefined: usize },

    #[error("malformed file: {0}")]
    Parse(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl MxError {
    /// Process exit code for the command-line front end.
    ///
    /// 1 = data error, 2 = I/O error, 3 = configuration error.
    pub fn exit_code(&self) -> i32 {
        match self {
            MxError::Io { .. } => 2,
            MxError::UnsupportedFormat(_)
            | MxError::Config(_)
            | MxError::Divisibility { .. }
            | MxError::UnsupportedPath(_)
            | MxError::UnsupportedDimension(_) => 3,
            MxError::NanInput { .. }
            | MxError::InvalidInput(_)
            | MxError::Shape(_)
            | MxError::EmptySummary { .. }
            | MxError::Parse(_) => 1,
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        MxError::Io {
            path: path.into(),
            source,
        }
    }
}
