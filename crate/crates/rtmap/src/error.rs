use std::path::{Path, PathBuf};

use rtmap_core::error::ConfigError;
use rtmap_core::eval::EvalError;
use rtmap_core::frontend::FrontendError;
use rtmap_core::sim::TrajectoryError;
use rtmap_core::PoseError;

/// Every failure the command line can report, grouped by exit code.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("{path}: {message}")]
    Parse { path: PathBuf, message: String },
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {message}")]
    Format { path: PathBuf, message: String },
    #[error("output directory {0} exists and is not empty (use --force)")]
    OutputNotEmpty(PathBuf),
    #[error(transparent)]
    Trajectory(#[from] TrajectoryError),
    #[error("odometry gap: {0}")]
    Pose(PoseError),
    #[error("rasters are not aligned: {0}")]
    Misaligned(String),
    #[error("{0}")]
    Eval(String),
}

impl Error {
    pub fn io(path: impl AsRef<Path>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.as_ref().to_path_buf(),
            source,
        }
    }

    pub fn format(path: impl AsRef<Path>, message: impl Into<String>) -> Self {
        Error::Format {
            path: path.as_ref().to_path_buf(),
            message: message.into(),
        }
    }

    pub fn parse(path: impl AsRef<Path>, message: impl Into<String>) -> Self {
        Error::Parse {
            path: path.as_ref().to_path_buf(),
            message: message.into(),
        }
    }

    /// Process exit code: 2 configuration, 3 I/O and format, 4 odometry gap,
    /// 5 misaligned rasters, 1 anything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) | Error::Parse { .. } | Error::Trajectory(_) => 2,
            Error::Io { .. } | Error::Format { .. } | Error::OutputNotEmpty(_) => 3,
            Error::Pose(_) => 4,
            Error::Misaligned(_) => 5,
            Error::Eval(_) => 1,
        }
    }
}

impl From<PoseError> for Error {
    fn from(e: PoseError) -> Self {
        Error::Pose(e)
    }
}

impl From<FrontendError> for Error {
    fn from(e: FrontendError) -> Self {
        match e {
            FrontendError::Config(c) => Error::Config(c),
            FrontendError::Pose { source, .. } => Error::Pose(source),
            other => Error::Eval(other.to_string()),
        }
    }
}

impl From<EvalError> for Error {
    fn from(e: EvalError) -> Self {
        match e {
            EvalError::Misaligned => Error::Misaligned(e.to_string()),
            EvalError::Pose(p) => Error::Pose(p),
            other => Error::Eval(other.to_string()),
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
