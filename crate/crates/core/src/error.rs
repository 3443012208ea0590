use alloc::string::String;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("insufficient data: {0}")]
    InsufficientData(String),
    #[error("degenerate configuration: {0}")]
    DegenerateConfiguration(String),
    #[error("point maps to infinity")]
    PointAtInfinity,
    #[error("point is at or behind the camera plane")]
    BehindCamera,
    #[error("invalid geometry: {0}")]
    InvalidGeometry(String),
    #[error("track truncated after {generated} frames")]
    TrackTruncated { generated: usize },
    #[error("shape mismatch: expected {expected}, got {actual}")]
    ShapeError { expected: String, actual: String },
    #[error("region leaves the image")]
    ClipError,
    #[error("no ink found on plate")]
    EmptyPlate,
    #[error("configuration error: {0}")]
    ConfigurationError(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

impl Error {
    pub(crate) fn insufficient(msg: &str) -> Self {
        Error::InsufficientData(msg.into())
    }

    pub(crate) fn degenerate(msg: &str) -> Self {
        Error::DegenerateConfiguration(msg.into())
    }

    pub(crate) fn shape(expected: impl Into<String>, actual: impl Into<String>) -> Self {
        Error::ShapeError {
            expected: expected.into(),
            actual: actual.into(),
        }
    }
}
