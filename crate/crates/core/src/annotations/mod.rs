//! Annotator judgments: quality control, aggregation into continuous labels,
//! and the agreement and subjectivity analyses over those labels.

mod aggregate;
mod analysis;
mod complex;
mod cwi;
mod qc;
mod records;
mod shapiro;

use std::path::PathBuf;

pub use aggregate::{
    aggregate, label_from_scores, labels_to_tsv, parse_labels, read_labels, write_labels,
    Aggregation, ComplexityLabel, DroppedInstance,
};
pub use analysis::{
    agreement_histogram, subjectivity_correlation, AgreementHistogram, ComplexitySummary,
    HistogramBucket, MeanCell, SummaryRow,
};
pub use complex::{
    find_release_files, parse_released, read_release_dir, read_released, ReleasedEntry,
};
pub use cwi::{parse_cwi2016, parse_cwi2018, read_cwi2016, read_cwi2018};
pub use qc::{
    filter_annotators, instance_frequencies, InstanceFrequencies, QcConfig, QcReport, RejectReason,
    Rejection,
};
pub use records::{map_likert, read_jsonl, write_jsonl, AnnotationRecord, LIKERT_SCALE};
pub use shapiro::shapiro_wilk;

#[derive(Debug, thiserror::Error)]
pub enum AnnotationError {
    #[error("likert label {0} outside 1-5")]
    LikertOutOfRange(i64),
    #[error("invalid annotation: {0}")]
    InvalidRecord(String),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("need at least {needed} labels, found {found}")]
    TooFew { needed: usize, found: usize },
    #[error("{path}: line {line}: {message}")]
    Parse {
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
