use std::fmt;

/// Errors produced across the pipeline, grouped by how the command line
/// reports them.
#[derive(Debug)]
pub enum PareError {
    /// Bad command line arguments or an invalid run configuration (exit code 1).
    Usage(String),
    /// Missing, malformed, or inconsistent input data (exit code 2).
    Data(String),
    /// Numeric failure: shape mismatch, non-finite values, divergence (exit code 3).
    Numeric(String),
}

impl PareError {
    pub fn usage(msg: impl Into<String>) -> PareError {
        PareError::Usage(msg.into())
    }

    pub fn data(msg: impl Into<String>) -> PareError {
        PareError::Data(msg.into())
    }

    pub fn numeric(msg: impl Into<String>) -> PareError {
        PareError::Numeric(msg.into())
    }

    /// Process exit code for the CLI: 1 usage, 2 data error, 3 numeric failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            PareError::Usage(_) => 1,
            PareError::Data(_) => 2,
            PareError::Numeric(_) => 3,
        }
    }
}

impl fmt::Display for PareError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PareError::Usage(msg) => write!(f, "usage error: {msg}"),
            PareError::Data(msg) => write!(f, "data error: {msg}"),
            PareError::Numeric(msg) => write!(f, "numeric error: {msg}"),
        }
    }
}

impl std::error::Error for PareError {}

impl From<std::io::Error> for PareError {
    fn from(err: std::io::Error) -> PareError {
        PareError::Data(err.to_string())
    }
}

pub type Result<T> = std::result::Result<T, PareError>;
