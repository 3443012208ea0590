//! Command failures: a short machine-parseable reason plus detail.

use std::fmt;
use std::path::Path;

use roadspeed_core::Error as CoreError;

/// Every failed command exits with this code.
pub const EXIT_FAILURE: i32 = 2;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Failure {
    /// Stable lowercase phrase, e.g. `insufficient correspondences`.
    pub reason: String,
    pub detail: String,
}

impl Failure {
    pub fn new(reason: impl Into<String>, detail: impl Into<String>) -> Self {
        Self {
            reason: reason.into(),
            detail: detail.into(),
        }
    }

    pub fn io(path: &Path, err: impl fmt::Display) -> Self {
        Self::new("io error", format!("{}: {err}", path.display()))
    }

    pub fn invalid_input(path: &Path, err: impl fmt::Display) -> Self {
        Self::new("invalid input", format!("{}: {err}", path.display()))
    }

    /// The single stderr line printed on exit.
    pub fn line(&self) -> String {
        let text = if self.detail.is_empty() {
            format!("error: {}", self.reason)
        } else {
            format!("error: {}: {}", self.reason, self.detail)
        };
        text.replace(['\n', '\r'], " ")
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.detail.is_empty() {
            f.write_str(&self.reason)
        } else {
            write!(f, "{}: {}", self.reason, self.detail)
        }
    }
}

impl std::error::Error for Failure {}

impl From<CoreError> for Failure {
    fn from(e: CoreError) -> Self {
        match e {
            CoreError::InsufficientData(m) => Self::new("insufficient data", m),
            CoreError::DegenerateConfiguration(m) => Self::new("degenerate configuration", m),
            CoreError::InvalidGeometry(m) => Self::new("invalid geometry", m),
            CoreError::ConfigurationError(m) => Self::new("configuration error", m),
            CoreError::InvalidParameter(m) => Self::new("invalid parameter", m),
            CoreError::PointAtInfinity => Self::new("point at infinity", ""),
            CoreError::BehindCamera => Self::new("behind camera", ""),
            CoreError::ClipError => Self::new("clip error", ""),
            CoreError::EmptyPlate => Self::new("empty plate", ""),
            CoreError::TrackTruncated { generated } => {
                Self::new("track truncated", format!("after {generated} frames"))
            }
            CoreError::ShapeError { expected, actual } => {
                Self::new("shape mismatch", format!("expected {expected}, got {actual}"))
            }
        }
    }
}

pub type Result<T> = std::result::Result<T, Failure>;
