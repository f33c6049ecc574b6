use std::path::PathBuf;

/// Errors raised by ingestion, configuration loading and the probe.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("line {line}: malformed record: {message}")]
    Malformed { line: usize, message: String },

    #[error("duplicate claim_id {0:?}")]
    DuplicateId(String),

    #[error("column {field} index {index} out of range (row has {width} columns)")]
    ColumnOutOfRange {
        field: &'static str,
        index: usize,
        width: usize,
    },

    #[error("pattern {id:?} failed to compile: {message}")]
    Pattern { id: String, message: String },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("consistency error: {0}")]
    Consistency(String),

    #[error("empty training set")]
    EmptyTrainSet,

    #[error("model file: {0}")]
    ModelFormat(String),

    #[error(transparent)]
    Csv(#[from] csv::Error),

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

    /// True for errors caused by configuration (pattern files, label files,
    /// column maps) rather than by the data being processed.
    pub fn is_config(&self) -> bool {
        matches!(
            self,
            Error::Pattern { .. } | Error::Config(_) | Error::ColumnOutOfRange { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
