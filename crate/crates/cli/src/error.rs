use std::path::PathBuf;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("schema error at `{path}`: {message}")]
    Schema { path: String, message: String },
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("invalid argument: {0}")]
    Invalid(String),
    #[error(transparent)]
    Core(#[from] qeilab_core::Error),
}
