use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::models::ComplexityBin;

use super::qc::QcConfig;
use super::records::AnnotationRecord;
use super::shapiro::shapiro_wilk;
use super::AnnotationError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComplexityLabel {
    pub instance_id: String,
    pub mean: f64,
    /// Population standard deviation.
    pub stdev: f64,
    pub n: usize,
    pub shapiro_w: Option<f64>,
    pub bin: ComplexityBin,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DroppedInstance {
    pub instance_id: String,
    pub n: usize,
    pub reason: String,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Aggregation {
    pub labels: Vec<ComplexityLabel>,
    pub dropped: Vec<DroppedInstance>,
}

/// Label from already-mapped scores; sorted before summation so the result
/// does not depend on record order.
pub fn label_from_scores(
    instance_id: &str,
    scores: &[f64],
) -> Result<ComplexityLabel, AnnotationError> {
    if scores.is_empty() {
        return Err(AnnotationError::InvalidRecord(format!(
            "{instance_id}: no scores"
        )));
    }
    let mut s = scores.to_vec();
    s.sort_by(f64::total_cmp);
    let n = s.len() as f64;
    let mean = (s.iter().sum::<f64>() / n).clamp(0.0, 1.0);
    let var = s.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
    let bin = ComplexityBin::from_score(mean)
        .map_err(|e| AnnotationError::InvalidRecord(e.to_string()))?;
    Ok(ComplexityLabel {
        instance_id: instance_id.to_string(),
        mean,
        stdev: var.sqrt(),
        n: s.len(),
        shapiro_w: shapiro_wilk(&s),
        bin,
    })
}

/// Mean and spread of the mapped scores per instance, dropping instances with
/// fewer than `min_valid_annotations` records.
pub fn aggregate(
    records: &[AnnotationRecord],
    qc: &QcConfig,
) -> Result<Aggregation, AnnotationError> {
    let mut by_instance: BTreeMap<&str, Vec<f64>> = BTreeMap::new();
    for r in records {
        r.validate()?;
        by_instance
            .entry(r.instance_id.as_str())
            .or_default()
            .push(r.score());
    }
    let mut out = Aggregation::default();
    for (id, scores) in by_instance {
        if scores.len() < qc.min_valid_annotations {
            out.dropped.push(DroppedInstance {
                instance_id: id.to_string(),
                n: scores.len(),
                reason: format!(
                    "{} valid annotations, fewer than the required {}",
                    scores.len(),
                    qc.min_valid_annotations
                ),
            });
            continue;
        }
        out.labels.push(label_from_scores(id, &scores)?);
    }
    Ok(out)
}

const LABEL_HEADER: &str = "instance_id\tmean\tstdev\tn\tshapiro_w\tbin";

pub fn labels_to_tsv(labels: &[ComplexityLabel]) -> String {
    let mut out = format!("{LABEL_HEADER}\n");
    for l in labels {
        let w = l
            .shapiro_w
            .map_or_else(|| "NA".to_string(), |w| w.to_string());
        out.push_str(&format!(
            "{}\t{}\t{}\t{}\t{}\t{}\n",
            l.instance_id, l.mean, l.stdev, l.n, w, l.bin
        ));
    }
    out
}

pub fn write_labels(path: &Path, labels: &[ComplexityLabel]) -> Result<(), AnnotationError> {
    fs::write(path, labels_to_tsv(labels)).map_err(|source| AnnotationError::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn read_labels(path: &Path) -> Result<Vec<ComplexityLabel>, AnnotationError> {
    let text = fs::read_to_string(path).map_err(|source| AnnotationError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_labels(&text, path)
}

pub fn parse_labels(text: &str, path: &Path) -> Result<Vec<ComplexityLabel>, AnnotationError> {
    let mut lines = text.lines().enumerate();
    let bad = |line: usize, message: String| AnnotationError::Parse {
        path: path.to_path_buf(),
        line,
        message,
    };
    match lines.next() {
        Some((_, h)) if h.trim_end() == LABEL_HEADER => {}
        _ => return Err(bad(1, format!("expected header `{LABEL_HEADER}`"))),
    }
    let mut out = Vec::new();
    for (i, line) in lines.filter(|(_, l)| !l.trim().is_empty()) {
        let lineno = i + 1;
        let c: Vec<&str> = line.split('\t').collect();
        if c.len() != 6 {
            return Err(bad(lineno, format!("{} columns, expected 6", c.len())));
        }
        let num = |s: &str| {
            s.parse::<f64>()
                .map_err(|e| bad(lineno, format!("`{s}`: {e}")))
        };
        out.push(ComplexityLabel {
            instance_id: c[0].to_string(),
            mean: num(c[1])?,
            stdev: num(c[2])?,
            n: c[3]
                .parse()
                .map_err(|e| bad(lineno, format!("`{}`: {e}", c[3])))?,
            shapiro_w: if c[4] == "NA" { None } else { Some(num(c[4])?) },
            bin: c[5]
                .parse()
                .map_err(|e: crate::models::ModelError| bad(lineno, e.to_string()))?,
        });
    }
    Ok(out)
}
