use std::fs;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use super::AnnotationError;

/// Five-point scale shown to annotators, from 1 (very easy) to 5 (very difficult).
pub const LIKERT_SCALE: [(u8, &str, &str); 5] = [
    (1, "Very Easy", "Words which were very familiar to an annotator."),
    (2, "Easy", "Words with which an annotator was aware of the meaning."),
    (3, "Neutral", "A word which was neither difficult nor easy."),
    (
        4,
        "Difficult",
        "Words which an annotator was unclear of the meaning, but may have been able to infer the meaning from the sentence.",
    ),
    (5, "Very Difficult", "Words that an annotator had never seen before, or were very unclear."),
];

/// Maps a Likert label to `[0, 1]`: 1 -> 0, 2 -> 0.25, ..., 5 -> 1.
pub fn map_likert(label: u8) -> Result<f64, AnnotationError> {
    if !(1..=5).contains(&label) {
        return Err(AnnotationError::LikertOutOfRange(label.into()));
    }
    Ok(f64::from(label - 1) / 4.0)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnnotationRecord {
    pub instance_id: String,
    pub annotator_id: String,
    pub likert: u8,
    /// Seconds spent on the judgment.
    pub elapsed: f64,
    pub batch: u32,
    pub timestamp: DateTime<Utc>,
}

impl AnnotationRecord {
    pub fn validate(&self) -> Result<(), AnnotationError> {
        map_likert(self.likert)?;
        if !self.elapsed.is_finite() || self.elapsed < 0.0 {
            return Err(AnnotationError::InvalidRecord(format!(
                "{}/{}: elapsed {} is negative or non-finite",
                self.annotator_id, self.instance_id, self.elapsed
            )));
        }
        if self.instance_id.is_empty() || self.annotator_id.is_empty() {
            return Err(AnnotationError::InvalidRecord(
                "empty instance or annotator id".into(),
            ));
        }
        Ok(())
    }

    pub fn score(&self) -> f64 {
        map_likert(self.likert).expect("validated record")
    }
}

/// Parses a JSON-lines annotation log, validating every record.
pub fn read_jsonl(path: &Path) -> Result<Vec<AnnotationRecord>, AnnotationError> {
    let file = fs::File::open(path).map_err(|source| AnnotationError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let mut out = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|source| AnnotationError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        if line.trim().is_empty() {
            continue;
        }
        let parse = |message: String| AnnotationError::Parse {
            path: path.to_path_buf(),
            line: i + 1,
            message,
        };
        let rec: AnnotationRecord =
            serde_json::from_str(&line).map_err(|e| parse(e.to_string()))?;
        rec.validate().map_err(|e| parse(e.to_string()))?;
        out.push(rec);
    }
    Ok(out)
}

pub fn write_jsonl(path: &Path, records: &[AnnotationRecord]) -> Result<(), AnnotationError> {
    let io = |source| AnnotationError::Io {
        path: path.to_path_buf(),
        source,
    };
    let mut f = std::io::BufWriter::new(fs::File::create(path).map_err(io)?);
    for r in records {
        let line = serde_json::to_string(r).expect("record serializes");
        writeln!(f, "{line}").map_err(io)?;
    }
    f.flush().map_err(io)
}
