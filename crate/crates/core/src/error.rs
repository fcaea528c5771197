use std::path::PathBuf;

use thiserror::Error;

/// Everything that can go wrong between decoding an image and printing a ranking.
#[derive(Debug, Error)]
pub enum Error {
    #[error("cannot read image {path}: {reason}")]
    UnreadableFile { path: PathBuf, reason: String },

    #[error("unsupported image format: {0}")]
    UnsupportedFormat(PathBuf),

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("image has no pixels")]
    EmptyImage,

    #[error("feature matrix has no class labels")]
    MissingLabels,

    #[error("unknown attribute {attribute} (system has {count} attributes)")]
    UnknownAttribute { attribute: usize, count: usize },

    #[error("exhaustive reduct limited to {limit} attributes, got {count}")]
    TooManyAttributes { count: usize, limit: usize },

    #[error("length mismatch: expected {expected}, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },

    #[error("external normalization needs at least 2 distances, got {0}")]
    TooFewCandidates(usize),

    #[error("invalid fusion weights ({texture}, {color}): must be non-negative and sum to 1")]
    InvalidWeights { texture: f64, color: f64 },

    #[error("retrieval index is empty")]
    EmptyIndex,

    #[error("no decodable images found under {0}")]
    NoImagesFound(PathBuf),

    #[error("corrupt index: {0}")]
    CorruptIndex(String),

    #[error("unsupported index version {0}")]
    UnsupportedVersion(u32),

    #[error("insufficient corpus: {0}")]
    InsufficientCorpus(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
