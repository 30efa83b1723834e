use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("cannot access {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("line {line}: malformed record: {message}")]
    Malformed { line: usize, message: String },

    #[error("line {line}: duplicate document id `{id}`")]
    DuplicateId { line: usize, id: String },

    #[error("line {line}: duplicate score for document `{doc_id}` and system `{system_id}`")]
    DuplicateScore {
        line: usize,
        doc_id: String,
        system_id: String,
    },

    #[error("line {line}: score {score} is outside [0, 1] for a unit-interval table")]
    ScoreOutOfRange { line: usize, score: f64 },

    #[error("document `{0}` is unknown")]
    MissingDocument(String),

    #[error("document `{doc_id}` has no score for system `{system_id}`")]
    MissingSystemScore { doc_id: String, system_id: String },

    #[error("document `{0}` has no reference summary")]
    MissingReference(String),

    #[error("no entity annotation for document `{0}`")]
    MissingAnnotation(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("need at least {needed} samples, got {got}")]
    TooFewSamples { needed: usize, got: usize },

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("schema mismatch: model expects {expected}, got {got}")]
    SchemaMismatch { expected: String, got: String },

    #[error("transform `{transform}` is not applicable to document `{doc_id}`: {reason}")]
    InfeasibleTransform {
        transform: String,
        doc_id: String,
        reason: String,
    },

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn invalid(message: impl Into<String>) -> Self {
        Error::InvalidInput(message.into())
    }

    /// True for errors caused by the filesystem rather than by the data.
    pub fn is_io(&self) -> bool {
        matches!(self, Error::Io { .. })
    }
}
