use std::path::PathBuf;

use thiserror::Error;

/// Errors produced anywhere in the toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed JSON: {0}")]
    Parse(#[from] serde_json::Error),

    #[error("schema error: {0}")]
    Schema(String),

    #[error("dialogue {id}: {reason}")]
    Invariant { id: String, reason: String },

    /// Several dialogues failed validation; one diagnostic per dialogue.
    #[error("{} invalid dialogue(s): {}", .0.len(), .0.join("; "))]
    InvalidDialogues(Vec<String>),

    #[error("annotation error for dialogue {id}: {reason}")]
    Annotation { id: String, reason: String },

    #[error("missing outcome on dialogue {0}")]
    MissingOutcome(String),

    #[error("invalid distribution: {0}")]
    Distribution(String),

    #[error("adjective bank: {0}")]
    AdjectiveBank(String),

    #[error("negotiation config: {0}")]
    Config(String),

    #[error("protocol error: {0}")]
    Protocol(String),

    #[error("backend error: {0}")]
    Backend(String),

    #[error("lexicon: {0}")]
    Lexicon(String),

    #[error("embeddings: {0}")]
    Embeddings(String),

    #[error("undefined distance: {0}")]
    UndefinedDistance(String),

    #[error("empty input: {0}")]
    EmptyInput(String),

    #[error("support mismatch: {0} vs {1}")]
    SupportMismatch(usize, usize),

    #[error("too few samples: {0}")]
    TooFewSamples(String),

    #[error("degenerate samples: {0}")]
    DegenerateSamples(String),

    #[error("taxonomy: {0}")]
    Taxonomy(String),

    #[error("cache: {0}")]
    Cache(String),

    #[error("incompatible reports: {0}")]
    IncompatibleReports(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn invariant(id: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Invariant {
            id: id.into(),
            reason: reason.into(),
        }
    }

    pub(crate) fn annotation(id: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Annotation {
            id: id.into(),
            reason: reason.into(),
        }
    }
}
