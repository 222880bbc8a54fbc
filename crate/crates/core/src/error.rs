use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// Input outside the domain of a formula (negative height, zero distance, ...).
    #[error("domain error: {0}")]
    Domain(String),

    #[error("link infeasible: {0}")]
    InfeasibleLink(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("unknown node `{0}`")]
    UnknownNode(String),

    #[error("duplicate node id `{0}`")]
    DuplicateNode(String),

    #[error("unknown flight `{0}`")]
    UnknownFlight(String),

    #[error("brute-force enumeration refused: {nodes} nodes exceeds the limit of {limit}")]
    TooLarge { nodes: usize, limit: usize },

    #[error("{path}: malformed flight data\n{}", .problems.join("\n"))]
    Load { path: PathBuf, problems: Vec<String> },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },

    #[error("{path}: {source}")]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }

    pub(crate) fn csv(path: impl Into<PathBuf>, source: csv::Error) -> Self {
        Error::Csv { path: path.into(), source }
    }
}
