use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use crate::corpus::{FrequencyTable, Instance};
use crate::eval::spearman;

use super::records::AnnotationRecord;
use super::AnnotationError;

/// Instance id -> corpus frequency of the target.
pub type InstanceFrequencies = HashMap<String, u64>;

/// Target frequencies for every instance the table knows (phrases take their rarest word).
pub fn instance_frequencies(instances: &[Instance], table: &FrequencyTable) -> InstanceFrequencies {
    instances
        .iter()
        .filter_map(|i| {
            table
                .get_phrase(&i.constituents())
                .map(|f| (i.id.clone(), f))
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct QcConfig {
    pub min_valid_annotations: usize,
    pub uniform_annotator_reject: bool,
    /// Annotators whose median seconds per judgment fall below this are rejected.
    pub min_elapsed: f64,
    /// Annotators whose score/log-frequency Spearman rho exceeds `-floor` are rejected.
    pub frequency_correlation_floor: f64,
    /// Fewest records before the uniform-label gate applies.
    pub uniform_min_records: usize,
    /// Fewest frequency-known records before the frequency gate applies.
    pub frequency_min_records: usize,
}

impl Default for QcConfig {
    fn default() -> Self {
        QcConfig {
            min_valid_annotations: 4,
            uniform_annotator_reject: true,
            min_elapsed: 3.0,
            frequency_correlation_floor: 0.0,
            uniform_min_records: 5,
            frequency_min_records: 10,
        }
    }
}

impl QcConfig {
    pub fn validate(&self) -> Result<(), AnnotationError> {
        if self.min_valid_annotations < 1 {
            return Err(AnnotationError::Config(
                "min_valid_annotations must be at least 1".into(),
            ));
        }
        if !self.min_elapsed.is_finite() || self.min_elapsed < 0.0 {
            return Err(AnnotationError::Config(
                "min_elapsed must be a non-negative number".into(),
            ));
        }
        if !self.frequency_correlation_floor.is_finite() {
            return Err(AnnotationError::Config(
                "frequency_correlation_floor must be finite".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "reason", rename_all = "snake_case")]
pub enum RejectReason {
    Uniform { likert: u8 },
    TooFast { median_elapsed: f64 },
    Frequency { rho: f64 },
}

impl RejectReason {
    pub fn label(&self) -> &'static str {
        match self {
            RejectReason::Uniform { .. } => "uniform",
            RejectReason::TooFast { .. } => "too_fast",
            RejectReason::Frequency { .. } => "frequency",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Rejection {
    pub annotator_id: String,
    pub n_records: usize,
    pub reasons: Vec<RejectReason>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct QcReport {
    pub n_annotators: usize,
    pub n_records_in: usize,
    pub n_records_kept: usize,
    pub rejected: Vec<Rejection>,
}

fn median(values: &mut [f64]) -> f64 {
    values.sort_by(f64::total_cmp);
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2]
    } else {
        (values[n / 2 - 1] + values[n / 2]) / 2.0
    }
}

fn screen(
    records: &[&AnnotationRecord],
    qc: &QcConfig,
    freq: Option<&InstanceFrequencies>,
) -> Vec<RejectReason> {
    let mut reasons = Vec::new();
    let first = records[0].likert;
    if qc.uniform_annotator_reject
        && records.len() >= qc.uniform_min_records
        && records.iter().all(|r| r.likert == first)
    {
        reasons.push(RejectReason::Uniform { likert: first });
    }
    let mut elapsed: Vec<f64> = records.iter().map(|r| r.elapsed).collect();
    let med = median(&mut elapsed);
    if med < qc.min_elapsed {
        reasons.push(RejectReason::TooFast {
            median_elapsed: med,
        });
    }
    if let Some(freq) = freq {
        let (scores, logf): (Vec<f64>, Vec<f64>) = records
            .iter()
            .filter_map(|r| {
                freq.get(&r.instance_id)
                    .map(|f| (r.score(), (*f as f64).ln_1p()))
            })
            .unzip();
        if scores.len() >= qc.frequency_min_records.max(3) {
            if let Ok(Some(rho)) = spearman(&scores, &logf) {
                if rho > -qc.frequency_correlation_floor {
                    reasons.push(RejectReason::Frequency { rho });
                }
            }
        }
    }
    reasons
}

/// Drops every record of annotators who fail a gate. Gates are per annotator,
/// so the filter is idempotent.
pub fn filter_annotators(
    records: &[AnnotationRecord],
    qc: &QcConfig,
    frequencies: Option<&InstanceFrequencies>,
) -> (Vec<AnnotationRecord>, QcReport) {
    let mut by_annotator: BTreeMap<&str, Vec<&AnnotationRecord>> = BTreeMap::new();
    for r in records {
        by_annotator
            .entry(r.annotator_id.as_str())
            .or_default()
            .push(r);
    }
    let mut rejected = Vec::new();
    for (annotator, recs) in &by_annotator {
        let reasons = screen(recs, qc, frequencies);
        if !reasons.is_empty() {
            rejected.push(Rejection {
                annotator_id: annotator.to_string(),
                n_records: recs.len(),
                reasons,
            });
        }
    }
    let kept: Vec<AnnotationRecord> = records
        .iter()
        .filter(|r| !rejected.iter().any(|x| x.annotator_id == r.annotator_id))
        .cloned()
        .collect();
    let report = QcReport {
        n_annotators: by_annotator.len(),
        n_records_in: records.len(),
        n_records_kept: kept.len(),
        rejected,
    };
    (kept, report)
}
