use thiserror::Error;

/// Errors raised by configuration, the exact engines and the test harness.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("parameter out of range: {0}")]
    OutOfRange(String),

    #[error("{engine} engine limit exceeded: {detail}")]
    EngineLimit { engine: &'static str, detail: String },

    #[error("invalid bit string {0:?}: expected characters '0' or '1'")]
    ParseBitString(String),

    #[error("length mismatch: expected {expected}, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),

    #[error("malformed input: {0}")]
    Parse(String),

    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// True for errors caused by bad user input rather than a runtime failure.
    pub fn is_usage(&self) -> bool {
        matches!(
            self,
            Error::InvalidConfig(_)
                | Error::OutOfRange(_)
                | Error::EngineLimit { .. }
                | Error::ParseBitString(_)
                | Error::LengthMismatch { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
