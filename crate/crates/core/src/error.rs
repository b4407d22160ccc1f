use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("product of beliefs is identically zero")]
    ZeroProduct,

    #[error("division by vacuous belief at entry {index}")]
    DivisionByVacuous { index: usize },

    #[error("support violation at entry {index}: old belief has no mass where new belief does")]
    SupportViolation { index: usize },

    #[error("belief families differ")]
    FamilyMismatch,

    #[error("invalid axis identifier {0}")]
    InvalidAxis(usize),

    #[error("invalid belief: {0}")]
    InvalidBelief(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("utterance {utterance}: code {code} outside vocabulary of size {vocab_size}")]
    CodeOutOfRange {
        utterance: String,
        code: usize,
        vocab_size: usize,
    },

    #[error("corpus is empty")]
    EmptyCorpus,

    #[error("utterance {0} has no codes")]
    EmptyUtterance(String),

    #[error("duplicate utterance id {0}")]
    DuplicateUtterance(String),

    #[error("unknown utterance id {0}")]
    UnknownUtterance(String),

    #[error("graph was built for {graph} but {requested} was requested")]
    ModelMismatch {
        graph: &'static str,
        requested: &'static str,
    },

    #[error("edge between clusters {from} and {to} does not exist")]
    NoSuchEdge { from: usize, to: usize },

    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    #[error("invalid alignment for {utterance}: {reason}")]
    InvalidAlignment { utterance: String, reason: String },

    #[error("utterance sets differ: {0}")]
    UtteranceMismatch(String),

    #[error("{path}:{line}: {reason}")]
    Parse {
        path: String,
        line: usize,
        reason: String,
    },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit code used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Io { .. } => 2,
            _ => 1,
        }
    }
}
