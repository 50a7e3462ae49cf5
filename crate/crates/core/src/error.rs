use alloc::string::String;

/// A configuration value violates its documented range.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("invalid configuration `{field}`: {reason}")]
pub struct ConfigError {
    pub field: &'static str,
    pub reason: String,
}

impl ConfigError {
    pub fn new(field: &'static str, reason: impl Into<String>) -> Self {
        Self {
            field,
            reason: reason.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum PoseError {
    #[error("cannot extrapolate pose at t={t:.6} s outside odometry span [{first:.6}, {last:.6}]")]
    Extrapolation { t: f64, first: f64, last: f64 },
    #[error("odometry is empty")]
    Empty,
    #[error("odometry sample {index}: {reason}")]
    InvalidSample { index: usize, reason: String },
}

impl PoseError {
    /// The query time for extrapolation errors.
    pub fn time(&self) -> Option<f64> {
        match self {
            PoseError::Extrapolation { t, .. } => Some(*t),
            _ => None,
        }
    }
}

/// A scan record breaks one of its structural invariants.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("invalid scan record: {0}")]
pub struct ScanError(pub String);
