use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("duplicate document id {id:?} (line {line})")]
    DuplicateId { id: String, line: usize },

    #[error("not enough documents: {required} required, {available} available")]
    InsufficientDocuments { required: usize, available: usize },

    #[error("empty corpus")]
    EmptyCorpus,

    #[error("empty vocabulary after applying min_count = {min_count}")]
    EmptyVocabulary { min_count: usize },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("document at index {doc} is missing from the ground-truth row")]
    MissingFromTruth { doc: usize },

    #[error("ranking and ground truth cover different documents: {0}")]
    CorpusMismatch(String),

    #[error("{context}: {source}")]
    Context {
        context: String,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub fn context(self, context: impl Into<String>) -> Self {
        Error::Context {
            context: context.into(),
            source: Box::new(self),
        }
    }
}
