use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("provider transport error: {0}")]
    Transport(String),

    #[error("annotation failed after {attempts} attempts: {message}")]
    Annotation { attempts: usize, message: String },

    #[error("label `{label}` is not in the {vocabulary} vocabulary")]
    OutOfVocabulary { vocabulary: &'static str, label: String },

    #[error("invalid graph file {path}: {message}")]
    GraphFormat { path: PathBuf, message: String },

    #[error("config error: {0}")]
    Config(String),

    #[error("stage `{stage}` failed: {message}")]
    Stage { stage: String, message: String },

    #[error("missing upstream artifact for stage `{upstream}`: {message}")]
    MissingArtifact { upstream: String, message: String },

    #[error("hash mismatch for stage `{stage}` inputs:\n{diff}")]
    HashMismatch { stage: String, diff: String },

    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }
}
