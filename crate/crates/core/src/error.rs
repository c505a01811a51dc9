use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid dimension: {0}")]
    InvalidDimension(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("invalid config: {0}")]
    InvalidConfig(String),
    #[error("too few samples: need at least {need}, got {got}")]
    TooFewSamples { need: usize, got: usize },
    #[error("matrix is not symmetric (max asymmetry {0:e})")]
    NotSymmetric(f64),
    #[error("unsatisfiable config: {0}")]
    Unsatisfiable(String),
    #[error("infeasible embedding: {0}")]
    InfeasibleEmbedding(String),
    #[error("missing column `{0}`")]
    MissingColumn(String),
    #[error("row {row}: non-numeric value {value:?} in column `{column}`")]
    NonNumeric { row: usize, column: String, value: String },
    #[error("row {row}: time {time} precedes {previous}")]
    UnorderedTime { row: usize, time: i64, previous: i64 },
    #[error("row {row}: {msg}")]
    MalformedRow { row: usize, msg: String },
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}: {source}")]
    Csv { path: PathBuf, source: csv::Error },
    #[error("{path}: {source}")]
    Json { path: PathBuf, source: serde_json::Error },
    #[error("config parse error: {0}")]
    ConfigParse(String),
    #[error("unknown config key `{0}`")]
    UnknownKey(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }
}
