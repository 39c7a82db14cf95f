use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("failed to read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed delimited input: {0}")]
    Csv(#[from] csv::Error),

    #[error("row {row} has {found} fields, header has {expected}")]
    RaggedRow { row: usize, expected: usize, found: usize },

    #[error("duplicate column name `{0}`")]
    DuplicateColumn(String),

    #[error("schema override names column `{0}`, which is not in the header")]
    UnknownColumn(String),

    #[error("column `{column}` declared {kind} but row {row} holds `{token}`")]
    TypeConflict {
        column: String,
        kind: &'static str,
        row: usize,
        token: String,
    },

    #[error("invalid schema file: {0}")]
    SchemaFile(String),

    #[error("table `{0}` is empty")]
    EmptyTable(&'static str),

    #[error("need at least {needed} rows, got {found}")]
    TooFewRows { needed: usize, found: usize },

    #[error("schema mismatch: {0}")]
    SchemaMismatch(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("tables were encoded by different discretization models ({left} vs {right})")]
    ProvenanceMismatch { left: String, right: String },

    #[error("marginal specs differ: {0}")]
    SpecMismatch(String),

    #[error("invalid run config: {0}")]
    Config(String),

    #[error("report error: {0}")]
    Report(String),

    #[error("all {0} candidates failed")]
    AllCandidatesFailed(usize),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
