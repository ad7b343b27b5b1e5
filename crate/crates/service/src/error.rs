use std::path::PathBuf;

#[derive(Debug, thiserror::Error)]
pub enum ServiceError {
    #[error("unknown annotator token")]
    Unauthorized,
    #[error("annotator `{0}` has been rejected")]
    Forbidden(String),
    #[error("{0}")]
    Validation(String),
    #[error("{0}")]
    Conflict(String),
    #[error("batch {0} is still open; pass force to review it anyway")]
    BatchOpen(u32),
    #[error("{0} not found")]
    NotFound(String),
    #[error("{path}: line {line}: {message}")]
    Replay {
        path: PathBuf,
        line: usize,
        message: String,
    },
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl ServiceError {
    pub fn code(&self) -> &'static str {
        match self {
            ServiceError::Unauthorized => "unauthorized",
            ServiceError::Forbidden(_) => "forbidden",
            ServiceError::Validation(_) => "validation",
            ServiceError::Conflict(_) => "conflict",
            ServiceError::BatchOpen(_) => "batch_open",
            ServiceError::NotFound(_) => "not_found",
            ServiceError::Replay { .. } => "replay",
            ServiceError::Io { .. } => "io",
        }
    }
}
