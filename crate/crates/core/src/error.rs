use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("need at least 2 training samples, got {0}")]
    TooFewSamples(usize),

    #[error("samples {first} and {second} share the same coordinates")]
    DuplicatePoint { first: usize, second: usize },

    #[error("non-finite {what} at index {index}")]
    NonFinite { what: &'static str, index: usize },

    #[error("dimension mismatch{}: expected {expected}, found {found}", fmt_index(*.index))]
    DimensionMismatch {
        expected: usize,
        found: usize,
        index: Option<usize>,
    },

    #[error("dimension must be positive")]
    ZeroDimension,

    #[error("epsilon must lie in [0, 1), got {0}")]
    InvalidEpsilon(f64),

    #[error("sample index {index} out of range for {n} samples")]
    IndexOutOfRange { index: usize, n: usize },

    #[error("degenerate domain: {0}")]
    DegenerateDomain(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("rate fit needs at least 3 entries, got {0}")]
    TooFewEntries(usize),

    #[error("entry {index} (n = {n}) has nonpositive error {error}; cannot take its logarithm")]
    NonPositiveError { index: usize, n: usize, error: f64 },

    #[error("sample sizes must be strictly increasing (entry {index})")]
    NotIncreasing { index: usize },

    #[error("unknown target function `{0}`")]
    UnknownTarget(String),

    #[error("{path}: row {row}: {message}")]
    Csv {
        path: PathBuf,
        row: usize,
        message: String,
    },

    #[error("{path}: rows {first} and {second} have identical coordinates")]
    CsvDuplicate {
        path: PathBuf,
        first: usize,
        second: usize,
    },

    #[error(transparent)]
    Model(#[from] ModelError),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

fn fmt_index(index: Option<usize>) -> String {
    match index {
        Some(i) => format!(" at index {i}"),
        None => String::new(),
    }
}

/// Failures while decoding a persisted model.
#[derive(Debug, Error, PartialEq)]
pub enum ModelError {
    #[error("not a model file (bad magic bytes)")]
    BadMagic,

    #[error("unsupported model format version {found} (this build reads version {supported})")]
    UnsupportedVersion { found: u32, supported: u32 },

    #[error("truncated model file: needed {needed} bytes at byte offset {offset}, file has {len}")]
    Truncated {
        offset: usize,
        needed: usize,
        len: usize,
    },

    #[error("corrupt field `{field}` at byte offset {offset}")]
    CorruptField { field: &'static str, offset: usize },

    #[error("checksum mismatch: stored {stored:#010x}, computed {computed:#010x}")]
    ChecksumMismatch { stored: u32, computed: u32 },

    #[error("{0} trailing bytes after checksum")]
    TrailingBytes(usize),
}
