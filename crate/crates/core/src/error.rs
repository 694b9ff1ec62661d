use std::path::PathBuf;

use thiserror::Error;

use crate::corpus::NodeId;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{context}: line {line}: {message}")]
    Parse {
        context: String,
        line: usize,
        message: String,
    },

    #[error("document {doc}: {message}")]
    InvalidDocument { doc: String, message: String },

    #[error("document {doc}: edge references unknown node id {id}")]
    UnknownNode { doc: String, id: NodeId },

    #[error("overlapping node spans [{a_start}, {a_end}) and [{b_start}, {b_end})")]
    OverlappingSpans {
        a_start: usize,
        a_end: usize,
        b_start: usize,
        b_end: usize,
    },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("backward called on a graph with no recorded forward pass")]
    NoForward,

    #[error("loss must be a scalar, found shape {0:?}")]
    NonScalarLoss(Vec<usize>),

    #[error("training set is empty")]
    EmptyTrainingSet,

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("checkpoint: {0}")]
    Checkpoint(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn invalid(doc: &str, message: impl Into<String>) -> Self {
        Error::InvalidDocument {
            doc: doc.to_string(),
            message: message.into(),
        }
    }
}
