use thiserror::Error;

/// Errors raised by pattern construction, the sensing operators, the solvers
/// and the image pipeline.
#[derive(Debug, Error)]
pub enum LbdError {
    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("shape mismatch: expected {expected}, found {found}")]
    Shape { expected: usize, found: usize },

    #[error("descriptor/pattern mismatch: descriptor was built with {descriptor:016x}, pattern is {pattern:016x}")]
    PatternMismatch { descriptor: u64, pattern: u64 },

    #[error("wrong descriptor payload: {0}")]
    PayloadType(String),

    #[error("malformed data: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Image(#[from] image::ImageError),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, LbdError>;

pub(crate) fn check_len(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(LbdError::Shape { expected, found })
    }
}
