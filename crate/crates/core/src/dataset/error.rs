use thiserror::Error;

/// Errors raised while loading, validating, or transforming datasets.
#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("invalid schema: {reason}")]
    SchemaInvalid { reason: String },

    #[error("schema column `{column}` missing from csv header")]
    MissingColumn { column: String },

    #[error("csv column `{column}` not declared in schema")]
    UnexpectedColumn { column: String },

    #[error("row {row}, column `{column}`: unknown level `{value}`")]
    UnknownLevel {
        row: usize,
        column: String,
        value: String,
    },

    #[error("row {row}, column `{column}`: `{value}` is not a finite number")]
    UnparseableNumeric {
        row: usize,
        column: String,
        value: String,
    },

    #[error("row {row}, column `{column}`: missing value; drop missing rows before encoding")]
    MissingValue { row: usize, column: String },

    #[error("no rows survive listwise deletion")]
    EmptyAfterCleaning,

    #[error("dataset is empty")]
    EmptyDataset,

    #[error("split ratio {ratio} outside (0, 1)")]
    InvalidRatio { ratio: f64 },

    #[error("stratum (group `{group}`, outcome {outcome}) is empty")]
    EmptyStratum { group: String, outcome: u8 },

    #[error("invalid dataset: {reason}")]
    Invalid { reason: String },

    #[error("invalid synthesis spec: {reason}")]
    InvalidSynthSpec { reason: String },
}

pub type Result<T> = std::result::Result<T, DatasetError>;
