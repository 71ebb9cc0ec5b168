use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum MolaError {
    #[error(transparent)]
    Core(#[from] mola_core::Error),
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{}: {message}", path.display())]
    Format { path: PathBuf, message: String },
    #[error("config field `{field}`: {message}")]
    Config { field: String, message: String },
    #[error("cannot parse config {}: {message}", path.display())]
    ConfigParse { path: PathBuf, message: String },
    #[error("duplicate seed {0}")]
    DuplicateSeed(u64),
    #[error("no seeds given")]
    NoSeeds,
    #[error("{} is missing expected inputs: {}", dir.display(), files.join(", "))]
    MissingInputs { dir: PathBuf, files: Vec<String> },
    #[error("cannot resume in {}: {message}", dir.display())]
    Resume { dir: PathBuf, message: String },
    #[error("worker pool: {0}")]
    Pool(String),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = MolaError> = std::result::Result<T, E>;

impl MolaError {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        MolaError::Io { path: path.into(), source }
    }

    pub(crate) fn format(path: impl Into<PathBuf>, message: impl Into<String>) -> Self {
        MolaError::Format { path: path.into(), message: message.into() }
    }

    pub(crate) fn config(field: impl Into<String>, message: impl Into<String>) -> Self {
        MolaError::Config { field: field.into(), message: message.into() }
    }
}
