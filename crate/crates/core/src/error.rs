use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("singular matrix at {witness}")]
    Singular { witness: String },

    #[error("truncation level J = {given} is too small for the input, need J >= {required}")]
    Truncation { required: u32, given: u32 },

    #[error("no admissible shift found below the cap {cap}")]
    ShiftNotFound { cap: f64 },

    #[error("ellipticity check failed: {0}")]
    NotElliptic(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }

    pub(crate) fn parse(msg: impl Into<String>) -> Self {
        Error::Parse(msg.into())
    }
}
