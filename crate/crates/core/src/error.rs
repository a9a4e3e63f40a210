use std::path::PathBuf;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{source_name}:{line}: {message}")]
    Parse {
        source_name: String,
        line: usize,
        message: String,
    },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("relation `{relation}` skipped: {reason}")]
    RelationSkipped { relation: String, reason: String },

    #[error("table generation failed: {0}")]
    Generation(String),

    #[error("index build failed: {0}")]
    IndexBuild(String),

    #[error("invalid query: {0}")]
    Query(String),

    #[error("contract violation: {0}")]
    Contract(String),

    #[error("table `{table_id}`: {message}")]
    Ingest { table_id: String, message: String },

    #[error("invalid table `{table_id}`: {message}")]
    InvalidTable { table_id: String, message: String },

    #[error("scoring failed: {0}")]
    Score(String),

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
