use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{source_name}: line {line}: {message}")]
    Parse {
        source_name: String,
        line: usize,
        message: String,
    },

    #[error("{source_name}: entry {entry}: {message}")]
    InvalidEntry {
        source_name: String,
        entry: String,
        message: String,
    },

    #[error("unknown {kind} id {id}")]
    UnknownId { kind: &'static str, id: u32 },

    #[error("constraint error: {0}")]
    Constraint(String),

    #[error("missing evidence for {axis} pair ({first}, {second})")]
    MissingEvidence {
        axis: &'static str,
        first: usize,
        second: usize,
    },

    #[error("missing evidence for {axis} element {element}")]
    MissingIndividualEvidence { axis: &'static str, element: usize },

    #[error("no alternative left for position {position}")]
    ExhaustedAlternatives { position: usize },

    #[error("generation failed: {0}")]
    GenerationFailure(String),

    #[error("matrix has no observed cells")]
    EmptyMatrix,

    #[error("correlation undefined: {0}")]
    UndefinedCorrelation(&'static str),

    #[error("trials do not cover {} palette(s): {}", .missing.len(), .missing.join("; "))]
    Coverage { missing: Vec<String> },

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
