use std::path::PathBuf;

/// Errors raised anywhere in the pipeline.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected:?}, got {got:?}")]
    Dimension {
        expected: (usize, usize),
        got: (usize, usize),
    },

    #[error("matrix must be square, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("matrix is not symmetric (max deviation {deviation:e})")]
    NotSymmetric { deviation: f64 },

    #[error("non-finite value at ({row}, {col})")]
    NonFinite { row: usize, col: usize },

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("dataset too small: n = {n}, need at least {required}")]
    DatasetTooSmall { n: usize, required: usize },

    #[error("degenerate neighborhood patch: {0}")]
    DegeneratePatch(String),

    #[error("vertex {index} has no incident edge weight")]
    IsolatedVertex { index: usize },

    #[error("smoothed set has {available} points, need at least {required}")]
    InsufficientSmoothPoints { available: usize, required: usize },

    #[error("no valid clustering: {0}")]
    NoValidClustering(String),

    #[error("label propagation impossible: every smooth point is noise")]
    PropagationImpossible,

    #[error("validity index undefined: {0}")]
    UndefinedIndex(String),

    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn param(msg: impl Into<String>) -> Self {
        Error::Parameter(msg.into())
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// True for failures caused by the input data itself (unreadable or
    /// malformed files) rather than by the numerical pipeline.
    pub fn is_data_error(&self) -> bool {
        matches!(
            self,
            Error::Io { .. } | Error::Parse { .. } | Error::Csv(_) | Error::NonFinite { .. }
        )
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
