use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, HarError>;

#[derive(Debug, Error)]
pub enum HarError {
    #[error("empty recording")]
    EmptyRecording,

    #[error("line {line}: {reason}")]
    MalformedLine { line: usize, reason: String },

    #[error("channel {channel} has no valid values")]
    AllMissingChannel { channel: usize },

    #[error("channel {channel} has zero variance")]
    ConstantChannel { channel: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("architecture invalid for window: {0}")]
    InvalidArchitecture(String),

    #[error("class {class} has {count} samples, fewer than {k} folds")]
    InsufficientSamples { class: usize, count: usize, k: usize },

    #[error("non-finite value: {0}")]
    NonFinite(String),

    #[error("training diverged at epoch {epoch}: loss {loss}")]
    Diverged { epoch: usize, loss: f64 },

    #[error("fold {fold}: {source}")]
    Fold {
        fold: usize,
        #[source]
        source: Box<HarError>,
    },

    #[error("bad file format: {0}")]
    Format(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl HarError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        HarError::Io {
            path: path.into(),
            source,
        }
    }
}
