use thiserror::Error;

/// Errors produced by graph construction, estimators, and the harness.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid graph: {0}")]
    InvalidGraph(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("infeasible construction: {0}")]
    Infeasible(String),

    /// A weight profile was paired with a graph other than the one it was
    /// computed from.
    #[error("stale weight profile: graph fingerprint mismatch")]
    StaleProfile,

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("invalid config: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
