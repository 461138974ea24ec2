use thiserror::Error;

/// Broad failure class, used by front ends to pick an exit status.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    Validation,
    Capacity,
    Corruption,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum Error {
    #[error("pgm parse error at byte {offset}: {reason}")]
    Pgm { offset: usize, reason: String },

    #[error("unsupported maxval {maxval} at byte {offset} (only 8-bit images are supported)")]
    UnsupportedMaxval { offset: usize, maxval: u32 },

    #[error("invalid parameter: {0}")]
    InvalidParam(String),

    #[error("image is {width}x{height}, minimum is 2x2")]
    ImageTooSmall { width: usize, height: usize },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("insufficient capacity: need {needed} bits, have {available} (deficit {} bits)", needed - available)]
    InsufficientCapacity { needed: usize, available: usize },

    #[error("field too large for the frame header: {0}")]
    Oversize(String),

    #[error("corrupt data: {0}")]
    Corrupt(String),
}

impl Error {
    pub fn class(&self) -> ErrorClass {
        match self {
            Error::Pgm { .. }
            | Error::UnsupportedMaxval { .. }
            | Error::InvalidParam(_)
            | Error::ImageTooSmall { .. }
            | Error::DimensionMismatch(_)
            | Error::Oversize(_) => ErrorClass::Validation,
            Error::InsufficientCapacity { .. } => ErrorClass::Capacity,
            Error::Corrupt(_) => ErrorClass::Corruption,
        }
    }

    pub(crate) fn corrupt(msg: impl Into<String>) -> Self {
        Error::Corrupt(msg.into())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
