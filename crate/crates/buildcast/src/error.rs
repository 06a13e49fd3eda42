//! Crate-wide error type.

use thiserror::Error;

/// Errors produced by stream ingestion, oversampling, learning, and the
/// pipeline front end.
#[derive(Debug, Error)]
pub enum Error {
    /// Header-level problem: a column is missing, unknown, or duplicated.
    #[error("schema error: {0}")]
    Schema(String),

    /// A data row could not be decoded. `row` is the 1-based data row index
    /// (the header is row 0).
    #[error("row {row}: {message}")]
    Row { row: usize, message: String },

    /// A configuration value is out of its documented domain.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// SMOTE neighbor search could not find enough same-class candidates.
    #[error("class {class} has only {available} other instances, need at least {needed}")]
    InsufficientNeighbors {
        class: String,
        available: usize,
        needed: usize,
    },

    /// Interpolation was attempted across two classes.
    #[error("class mismatch: seed is {seed} but neighbor is {neighbor}")]
    ClassMismatch { seed: String, neighbor: String },

    /// A manifest replay found an input whose content hash changed.
    #[error("input hash mismatch: manifest records {expected}, file is {actual}")]
    InputHashMismatch { expected: String, actual: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
