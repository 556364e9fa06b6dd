use std::path::PathBuf;

use fragvmp::VmpError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("cannot read {path}: {source}")]
    Read {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("cannot write {path}: {source}")]
    Write {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: line {line}: {message}")]
    Csv { path: PathBuf, line: u64, message: String },

    #[error("{path}: missing column '{column}' (available: {available})")]
    MissingColumn { path: PathBuf, column: String, available: String },

    #[error("{path}: line {line}, column '{column}': cannot parse '{value}' as a number")]
    Parse { path: PathBuf, line: u64, column: String, value: String },

    #[error("invalid arguments: {0}")]
    Usage(String),

    #[error("model error: {0}")]
    Model(#[from] VmpError),

    #[error("malformed result document: {0}")]
    Json(#[from] serde_json::Error),
}
