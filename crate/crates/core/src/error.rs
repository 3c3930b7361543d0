use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("grid mismatch: {left} vs {right} points per axis")]
    GridMismatch { left: usize, right: usize },

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("numerical abort at step {step} (t = {time}): {detail}")]
    NumericalAbort {
        step: usize,
        time: f64,
        detail: String,
    },

    #[error("empty tail: Q_tail = {q_tail} exceeds q_max = {q_max}")]
    EmptyTail { q_tail: i32, q_max: i32 },

    #[error("insufficient history: need at least {needed} snapshots, got {got}")]
    InsufficientHistory { needed: usize, got: usize },

    #[error("snapshot {path}: {check} check failed: {detail}")]
    Snapshot {
        path: PathBuf,
        check: SnapshotCheck,
        detail: String,
    },

    #[error("manifest: {0}")]
    Manifest(String),

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

/// The validation step that rejected a snapshot file.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SnapshotCheck {
    Magic,
    Version,
    HeaderLength,
    Header,
    PayloadSize,
    Values,
}

impl std::fmt::Display for SnapshotCheck {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            SnapshotCheck::Magic => "magic",
            SnapshotCheck::Version => "version",
            SnapshotCheck::HeaderLength => "header-length",
            SnapshotCheck::Header => "header",
            SnapshotCheck::PayloadSize => "size-mismatch",
            SnapshotCheck::Values => "values",
        };
        f.write_str(s)
    }
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit code used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::InvalidGrid(_)
            | Error::InvalidParameter { .. }
            | Error::Config(_)
            | Error::EmptyTail { .. }
            | Error::InsufficientHistory { .. }
            | Error::GridMismatch { .. } => 2,
            Error::Io { .. } | Error::Snapshot { .. } | Error::Manifest(_) | Error::Json(_) => 3,
            Error::NumericalAbort { .. } => 4,
        }
    }
}
