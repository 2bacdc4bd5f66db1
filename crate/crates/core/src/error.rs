use thiserror::Error;

/// Errors surfaced by the pipeline stages.
#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    /// Malformed input line; `line` is 1-based.
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    /// Inconsistent input data (e.g. one post attributed to two influencers).
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// Out-of-range or contradictory parameters.
    #[error("config error: {0}")]
    Config(String),

    /// A guard against pathological memory blowups fired.
    #[error("resource limit exceeded: {0}")]
    Resource(String),

    /// The requested quantity is mathematically undefined on this input.
    #[error("undefined: {0}")]
    Undefined(String),
}

impl Error {
    pub fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    pub fn undefined(msg: impl Into<String>) -> Self {
        Error::Undefined(msg.into())
    }
}
