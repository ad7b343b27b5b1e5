//! External lexical resources behind the word features: headered TSV
//! lexicon tables merged by word, frequent/archaic word lists, and a
//! plain-text embedding table.

mod categories;
mod embeddings;
mod lexicon;

use std::path::PathBuf;

pub use categories::{Infobox, Plurality, StressPattern, WordStatus, WordType};
pub use embeddings::EmbeddingTable;
pub use lexicon::{
    LexicalRecord, Lexicon, LexiconSources, LoadReport, Lookup, Presence, FREQUENT_LIST_SIZE,
};

#[derive(Debug, thiserror::Error)]
pub enum ResourceError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: line {line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },
    #[error("{path}: word `{word}`: {column} value {value} outside {lo}-{hi}")]
    OutOfRange {
        path: PathBuf,
        word: String,
        column: String,
        value: String,
        lo: u64,
        hi: u64,
    },
    #[error("{path}: line {line}: expected {expected} vector components, found {found}")]
    Dimension {
        path: PathBuf,
        line: usize,
        expected: usize,
        found: usize,
    },
}
