use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, GeodepthError>;

/// Unified error type for the whole pipeline.
///
/// Variants are grouped so the CLI can map them onto its documented exit
/// codes: 2 for usage/config problems, 3 for I/O, format, and data problems,
/// 4 for contract violations (empty selections, degenerate geometry, failed
/// registration).
#[derive(Debug, Error)]
pub enum GeodepthError {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed file {path}: {reason}")]
    Format { path: PathBuf, reason: String },

    #[error("invalid data: {0}")]
    Data(String),

    #[error("missing or invalid metadata for {path}: {reason}")]
    Metadata { path: PathBuf, reason: String },

    #[error("contract violation: {0}")]
    Contract(String),

    #[error("empty selection: {0}")]
    EmptySelection(String),

    #[error("calibration error: {0}")]
    Calibration(String),

    #[error("registration error: {0}")]
    Registration(String),

    #[error("degenerate ray origin: {0}")]
    DegenerateOrigin(String),

    #[error("invalid scene spec: {0}")]
    SceneSpec(String),

    #[error("invalid config: {0}")]
    Config(String),
}

impl GeodepthError {
    /// Process exit code used by the CLI for this error class.
    pub fn exit_code(&self) -> i32 {
        use GeodepthError::*;
        match self {
            Config(_) => 2,
            Io { .. } | Format { .. } | Data(_) | Metadata { .. } => 3,
            Contract(_) | EmptySelection(_) | Calibration(_) | Registration(_)
            | DegenerateOrigin(_) | SceneSpec(_) => 4,
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        GeodepthError::Io { path: path.into(), source }
    }

    pub(crate) fn format(path: impl Into<PathBuf>, reason: impl Into<String>) -> Self {
        GeodepthError::Format { path: path.into(), reason: reason.into() }
    }

    pub(crate) fn metadata(path: impl Into<PathBuf>, reason: impl Into<String>) -> Self {
        GeodepthError::Metadata { path: path.into(), reason: reason.into() }
    }
}
