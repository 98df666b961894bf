//! Crate-wide error type.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Error, Debug)]
pub enum Error {
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("{path}:{line}: {message}")]
    Parse {
        path: String,
        line: usize,
        message: String,
    },

    #[error("empty edge set in {0}")]
    EmptyEdgeSet(String),

    #[error("dataset has no kind annotations")]
    MissingKinds,

    #[error("kind {0:?} not present in dataset")]
    KindNotFound(String),

    #[error("object index {index} out of range (dataset has {len} objects)")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("label {0:?} does not resolve to an object")]
    UnknownLabel(String),

    #[error("dimension mismatch: {left} vs {right}")]
    DimMismatch { left: usize, right: usize },

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("non-finite gradient, step skipped")]
    NonFiniteGradient,

    #[error("non-finite value in {0}")]
    NonFinite(String),

    #[error("size guard exceeded: {got} objects > limit {limit}")]
    SizeGuard { got: usize, limit: usize },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("bad file format in {path}: {message}")]
    Format { path: String, message: String },

    #[error("empty walk corpus")]
    EmptyCorpus,

    #[error("{0}")]
    Invalid(String),
}

impl Error {
    /// Process exit code for the CLI: 2 config, 3 data, 4 numeric failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) => 2,
            Error::NonFiniteGradient | Error::NonFinite(_) => 4,
            _ => 3,
        }
    }
}
