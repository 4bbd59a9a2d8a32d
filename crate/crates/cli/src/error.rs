use std::path::PathBuf;

use som3d::SomError;
use thiserror::Error;

use crate::records::RowError;

pub type Result<T> = std::result::Result<T, CliError>;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("cannot read {path}: {source}")]
    Read {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("cannot write {path}: {source}")]
    Write {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Csv { path: PathBuf, source: csv::Error },
    #[error("{path}: missing column {column:?} (header has: {header})")]
    MissingColumn {
        path: PathBuf,
        column: String,
        header: String,
    },
    #[error("{path}: {row}")]
    BadRow { path: PathBuf, row: RowError },
    #[error("{path}: {bad} of {total} rows could not be parsed; first: {first}")]
    TooManyBadRows {
        path: PathBuf,
        bad: usize,
        total: usize,
        first: RowError,
    },
    #[error("invalid config {path}: {message}")]
    Config { path: PathBuf, message: String },
    #[error("invalid model artifact {path}: {message}")]
    Artifact { path: PathBuf, message: String },
    #[error("data does not match the model's encoding: {0}")]
    EncodingMismatch(String),
    #[error(transparent)]
    Som(#[from] SomError),
}

/// Process exit status for an error: 1 usage, 2 data, 3 numeric.
pub fn exit_code(err: &CliError) -> i32 {
    match err {
        CliError::Usage(_) | CliError::Config { .. } => 1,
        CliError::Som(e) => som_exit_code(e),
        _ => 2,
    }
}

fn som_exit_code(err: &SomError) -> i32 {
    match err {
        SomError::InvalidGrid { .. }
        | SomError::InvalidAlpha(_)
        | SomError::InvalidRadius(_)
        | SomError::InvalidConfig(_)
        | SomError::InvalidAxes(_)
        | SomError::SingleNodeGrid => 1,
        SomError::NonFinite { .. }
        | SomError::Decomposition
        | SomError::UndefinedCorrelation(_)
        | SomError::UndefinedRegression(_) => 3,
        _ => 2,
    }
}
