use std::path::PathBuf;

use crate::discretize::Class;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("target column `{0}` not found in header")]
    MissingTargetColumn(String),
    #[error("non-numeric cell {value:?} at row {row}, column `{column}`")]
    NonNumericCell {
        row: usize,
        column: String,
        value: String,
    },
    #[error("dataset has no rows")]
    EmptyDataset,
    #[error("duplicate feature name `{0}`")]
    DuplicateFeature(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("length mismatch: expected {expected}, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },
    #[error("target has fewer than two distinct values")]
    DegenerateTarget,
    #[error("{0} is empty")]
    EmptyClass(Class),
    #[error("{class} has {count} points, at least {required} required")]
    InsufficientClass {
        class: Class,
        count: usize,
        required: usize,
    },
    #[error("AUC is undefined when the truth contains a single class")]
    SingleClassTruth,
    #[error("no valid bootstrap resample after {0} redraws")]
    ResampleExhausted(usize),
    #[error("extremes set is empty")]
    EmptyExtremes,
    #[error("noisy area is empty")]
    EmptyNoisyArea,
    #[error("configuration error: {0}")]
    Config(String),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }
}
