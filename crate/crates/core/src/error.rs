use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModelError {
    #[error("projection requires at least one column")]
    EmptyProjection,
    #[error("column name must be non-empty (got {0:?})")]
    EmptyColumnName(String),
    #[error("data source symbol must be non-empty")]
    EmptySymbol,
}

/// A lexical or syntax error with a 1-based position.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{line}:{column}: {message}")]
pub struct SyntaxError {
    pub line: usize,
    pub column: usize,
    pub message: String,
}

impl SyntaxError {
    pub fn new(line: usize, column: usize, message: impl Into<String>) -> Self {
        Self { line, column, message: message.into() }
    }
}

#[derive(Debug, Error)]
pub enum ScriptError {
    #[error(transparent)]
    Syntax(#[from] SyntaxError),
    /// More visits to one CFG location than any monotone transfer can need.
    #[error("fixpoint iteration exceeded {limit} visits at location {location}; transfer is not monotone")]
    IterationLimit { location: usize, limit: usize },
}

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("reading {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {message}")]
    Invalid { path: PathBuf, message: String },
}

/// Manifest loading and repository construction failures.
#[derive(Debug, Error)]
pub enum IngestError {
    #[error("repository root {0} does not exist or is not a directory")]
    MissingRoot(PathBuf),
    #[error("manifest {0} not found")]
    MissingManifest(PathBuf),
    #[error("reading {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed manifest at {field}: {message}")]
    Malformed { field: String, message: String },
    #[error("invalid manifest at {field}: {message}")]
    Schema { field: String, message: String },
    #[error("duplicate id {id:?} at {field}")]
    DuplicateId { field: String, id: String },
    #[error("activity {activity:?} path {path:?} escapes the repository root ({field})")]
    PathEscape { field: String, activity: String, path: String },
    #[error(transparent)]
    Config(#[from] ConfigError),
}

impl IngestError {
    /// Dotted path of the offending manifest field, when there is one.
    pub fn field(&self) -> Option<&str> {
        match self {
            IngestError::Malformed { field, .. }
            | IngestError::Schema { field, .. }
            | IngestError::DuplicateId { field, .. }
            | IngestError::PathEscape { field, .. } => Some(field),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GraphError {
    #[error("graph {0}: no model (no activity calls a sink function)")]
    NoModel(String),
    #[error("graph {graph}: ambiguous start, candidates {candidates:?}")]
    AmbiguousStart { graph: String, candidates: Vec<String> },
}

#[derive(Debug, Error)]
pub enum AnalysisError {
    #[error(transparent)]
    Ingest(#[from] IngestError),
    #[error(transparent)]
    Script(#[from] ScriptError),
}

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("invalid bench spec: {0}")]
    InvalidSpec(String),
    #[error("writing {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Analysis(#[from] AnalysisError),
}
