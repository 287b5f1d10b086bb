use std::path::PathBuf;

use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid image: {0}")]
    InvalidImage(String),
    #[error("image contains non-finite values")]
    NonFinite,
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("wrong color domain: expected {expected}, found {found}")]
    WrongDomain {
        expected: &'static str,
        found: &'static str,
    },
    #[error("invalid kernel: {0}")]
    InvalidKernel(String),
    #[error("kernel exceeds image ({kernel} > {width}x{height})")]
    KernelExceedsImage {
        kernel: usize,
        width: usize,
        height: usize,
    },
    #[error("odd image dimensions {0}x{1}; Bayer data needs even width and height")]
    OddDimensions(usize, usize),
    #[error("malformed header in {path}: {reason}")]
    MalformedHeader { path: PathBuf, reason: String },
    #[error("truncated payload in {path}: expected {expected} bytes, found {found}")]
    TruncatedPayload {
        path: PathBuf,
        expected: usize,
        found: usize,
    },
    #[error("wrong block: expected {expected}, got {got}")]
    WrongBlock { expected: String, got: String },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("value {value} for `{name}` is outside [{min}, {max}]")]
    OutOfBounds {
        name: String,
        value: f64,
        min: f64,
        max: f64,
    },
    #[error("invalid burst: {0}")]
    InvalidBurst(String),
    #[error("noise calibration needs at least 2 distinct levels, got {0}")]
    TooFewLevels(usize),
    #[error("flat-region mask is empty")]
    EmptyMask,
    #[error("invalid optimizer configuration: {0}")]
    InvalidConfig(String),
    #[error("block {0} cannot be tuned before its upstream blocks")]
    MissingUpstream(String),
    #[error("{0}")]
    Experiment(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
