//! Fixed-layout word feature vectors and the feature/complexity correlation report.

mod correlation;
mod extract;
mod layout;
mod matrix;

use std::path::PathBuf;

pub use correlation::{correlation_report, FeatureCorrelation};
pub use extract::{normalized_length, FeatureVector, Featurizer, MAX_WORD_LENGTH};
pub use layout::{FeatureLayout, GroupId, PresenceFlag, EMBEDDING_DIM, LAYOUT_VERSION};
pub use matrix::{FeatureMatrix, MatrixSidecar};

#[derive(Debug, thiserror::Error)]
pub enum FeatureError {
    #[error("empty word")]
    EmptyWord,
    #[error("unknown feature group `{0}`")]
    UnknownGroup(String),
    #[error("instance `{id}`: {message}")]
    BadInstance { id: String, message: String },
    #[error("need at least {needed} instances, found {found}")]
    TooFew { needed: usize, found: usize },
    #[error("layout mismatch: expected {expected}, found {found}")]
    LayoutMismatch { expected: String, found: String },
    #[error("{path}: {message}")]
    Format { path: PathBuf, message: String },
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}
