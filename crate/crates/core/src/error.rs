use std::path::PathBuf;

use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    #[error("bad tar header checksum at block offset {offset}: stored {stored}, computed {computed}")]
    TarChecksum {
        offset: u64,
        stored: u32,
        computed: u32,
    },

    #[error("truncated tar archive: expected at least {expected} bytes, got {actual}")]
    TarTruncated { expected: u64, actual: u64 },

    #[error("malformed tar archive at block offset {offset}: {reason}")]
    TarMalformed { offset: u64, reason: String },

    #[error("offset {offset} out of range [0, {len})")]
    OffsetOutOfRange { offset: u64, len: u64 },

    #[error("invalid permutation: {reason}")]
    InvalidPermutation { reason: String },

    #[error("pixel ({row}, {col}) out of bounds for {height}x{width} image")]
    PixelOutOfBounds {
        row: u32,
        col: u32,
        height: u32,
        width: u32,
    },

    #[error("hilbert index {index} out of range for order {order}")]
    HilbertIndexOutOfRange { index: u64, order: u32 },

    #[error("hilbert coordinate ({x}, {y}) out of range for order {order}")]
    HilbertCoordOutOfRange { x: u32, y: u32, order: u32 },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("byte range ({offset}, {length}) exceeds {len} addressable bytes")]
    RangeOutOfBounds { offset: u64, length: u64, len: u64 },

    #[error("shape mismatch: expected {expected}, got {actual}")]
    ShapeMismatch { expected: String, actual: String },

    #[error("dataset generation failed: {0}")]
    Dataset(String),

    #[error("model error: {0}")]
    Model(String),

    #[error("non-finite value encountered: {0}")]
    NonFinite(String),

    #[error("scorer failed on patch (row {row}, col {col}): {reason}")]
    ScorerFailure { row: u32, col: u32, reason: String },

    #[error("empty bag: cannot aggregate zero patch labels")]
    EmptyBag,

    #[error("empty input: {0}")]
    Empty(String),

    #[error("missing artifact for record(s): {0:?}")]
    MissingArtifacts(Vec<String>),

    #[error("bad checkpoint file: {0}")]
    Checkpoint(String),

    #[error("bad file format in {path}: {reason}")]
    FileFormat { path: PathBuf, reason: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Png(#[from] png::EncodingError),

    #[error(transparent)]
    PngDecode(#[from] png::DecodingError),
}

pub type Result<T> = std::result::Result<T, Error>;
