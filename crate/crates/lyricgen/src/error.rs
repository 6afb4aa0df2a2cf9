use std::path::PathBuf;
use thiserror::Error;

/// Errors produced by the corpus, model, training, generation and metrics code.
#[derive(Debug, Error)]
pub enum Error {
    /// The input CSV header lacks a required column.
    #[error("dataset is missing required column `{0}`")]
    MissingColumn(String),

    /// A CSV data row could not be parsed.
    #[error("malformed CSV row {row}: {msg}")]
    MalformedRow { row: usize, msg: String },

    /// File I/O failure, tagged with the path involved.
    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    /// An id or index exceeded its valid bound.
    #[error("{what}: id {id} out of range (bound {bound})")]
    OutOfRange {
        what: &'static str,
        id: usize,
        bound: usize,
    },

    /// A non-finite value (NaN/Inf) appeared where finite math is required.
    #[error("non-finite value in {0}")]
    Numeric(String),

    /// Shapes or cached state do not line up with the parameters in use.
    #[error("shape/state mismatch: {0}")]
    Mismatch(String),

    /// Invalid configuration value.
    #[error("invalid configuration: {0}")]
    Config(String),

    /// Invalid input data (empty seed phrase, empty reference, empty pair list, ...).
    #[error("invalid input: {0}")]
    Input(String),

    /// A vocabulary file that is not a dense token -> id bijection.
    #[error("invalid vocabulary: {0}")]
    InvalidVocab(String),

    /// Checkpoint file does not start with the expected magic bytes.
    #[error("not a checkpoint file: bad magic")]
    BadMagic,

    /// Checkpoint version is not supported by this build.
    #[error("unsupported checkpoint version {found} (supported: {supported})")]
    UnsupportedVersion { found: u32, supported: u32 },

    /// Whole-file checksum did not match; the file is truncated or corrupt.
    #[error("checkpoint checksum mismatch (file truncated or corrupt)")]
    ChecksumMismatch,

    /// Checksum passed but the contents are internally inconsistent.
    #[error("corrupt checkpoint: {0}")]
    CorruptCheckpoint(String),
}

pub type Result<T> = std::result::Result<T, Error>;
