use serde::{Deserialize, Serialize};

use crate::models::ComplexityBin;

use super::correlation::{pearson, spearman};
use super::EvalError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassMetrics {
    pub bin: ComplexityBin,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub support: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    pub n: usize,
    pub pearson: Option<f64>,
    pub spearman: Option<f64>,
    /// Continuous MAE when scores are supplied, otherwise `mae_ordinal`.
    pub mae: f64,
    /// Mean bin distance divided by 4.
    pub mae_ordinal: f64,
    /// Mean over instances and bins of `|p_k - [k = gold]|`.
    pub mae_probability: Option<f64>,
    pub weighted_f1: f64,
    pub accuracy: f64,
    pub per_class: Vec<ClassMetrics>,
}

fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

/// Per-bin precision/recall/F1 (0 for empty denominators) and gold-support weighted F1.
pub fn classification_report(
    gold: &[ComplexityBin],
    pred: &[ComplexityBin],
) -> Result<MetricReport, EvalError> {
    if gold.len() != pred.len() {
        return Err(EvalError::LengthMismatch(gold.len(), pred.len()));
    }
    if gold.is_empty() {
        return Err(EvalError::TooFew {
            needed: 1,
            found: 0,
        });
    }
    let n = gold.len();
    let mut per_class = Vec::new();
    let mut weighted_f1 = 0.0;
    for bin in ComplexityBin::ALL {
        let tp = gold
            .iter()
            .zip(pred)
            .filter(|(g, p)| **g == bin && **p == bin)
            .count();
        let support = gold.iter().filter(|g| **g == bin).count();
        let predicted = pred.iter().filter(|p| **p == bin).count();
        let precision = ratio(tp, predicted);
        let recall = ratio(tp, support);
        let f1 = if precision + recall > 0.0 {
            2.0 * precision * recall / (precision + recall)
        } else {
            0.0
        };
        weighted_f1 += support as f64 / n as f64 * f1;
        if support > 0 || predicted > 0 {
            per_class.push(ClassMetrics {
                bin,
                precision,
                recall,
                f1,
                support,
            });
        }
    }
    let mae_ordinal = gold
        .iter()
        .zip(pred)
        .map(|(g, p)| (g.index() as f64 - p.index() as f64).abs() / 4.0)
        .sum::<f64>()
        / n as f64;
    let correct = gold.iter().zip(pred).filter(|(g, p)| g == p).count();
    Ok(MetricReport {
        n,
        pearson: None,
        spearman: None,
        mae: mae_ordinal,
        mae_ordinal,
        mae_probability: None,
        weighted_f1,
        accuracy: ratio(correct, n),
        per_class,
    })
}

impl MetricReport {
    /// Replaces `mae` with the continuous error and adds correlations of the scores.
    pub fn with_scores(mut self, gold: &[f64], pred: &[f64]) -> Result<Self, EvalError> {
        if gold.len() != self.n || pred.len() != self.n {
            return Err(EvalError::LengthMismatch(gold.len(), pred.len()));
        }
        self.mae = mean_absolute_error(gold, pred)?;
        if self.n >= 3 {
            self.pearson = pearson(gold, pred)?;
            self.spearman = spearman(gold, pred)?;
        }
        Ok(self)
    }

    pub fn with_probabilities(
        mut self,
        gold: &[ComplexityBin],
        probs: &[[f64; 5]],
    ) -> Result<Self, EvalError> {
        if gold.len() != probs.len() {
            return Err(EvalError::LengthMismatch(gold.len(), probs.len()));
        }
        let total: f64 = gold
            .iter()
            .zip(probs)
            .map(|(g, p)| {
                (0..5)
                    .map(|k| (p[k] - if k == g.index() { 1.0 } else { 0.0 }).abs())
                    .sum::<f64>()
            })
            .sum();
        self.mae_probability = Some(total / (5.0 * gold.len() as f64));
        Ok(self)
    }

    pub fn per_class_tsv(&self) -> String {
        let mut out = String::from("bin\tprecision\trecall\tf1\tsupport\n");
        for c in &self.per_class {
            out.push_str(&format!(
                "{}\t{:.4}\t{:.4}\t{:.4}\t{}\n",
                c.bin, c.precision, c.recall, c.f1, c.support
            ));
        }
        out
    }
}

pub fn mean_absolute_error(gold: &[f64], pred: &[f64]) -> Result<f64, EvalError> {
    if gold.len() != pred.len() {
        return Err(EvalError::LengthMismatch(gold.len(), pred.len()));
    }
    if gold.is_empty() {
        return Err(EvalError::TooFew {
            needed: 1,
            found: 0,
        });
    }
    Ok(gold
        .iter()
        .zip(pred)
        .map(|(g, p)| (g - p).abs())
        .sum::<f64>()
        / gold.len() as f64)
}

/// Expected score under a bin distribution, using bin midpoints.
pub fn expected_score(probs: &[f64; 5]) -> f64 {
    ComplexityBin::ALL
        .iter()
        .zip(probs)
        .map(|(b, p)| b.midpoint() * p)
        .sum()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegressionReport {
    pub n: usize,
    /// Computed on raw (unclamped) predictions.
    pub pearson: Option<f64>,
    pub spearman: Option<f64>,
    /// Computed on predictions clamped to `[0, 1]`.
    pub mae: f64,
}

pub fn regression_report(gold: &[f64], raw_pred: &[f64]) -> Result<RegressionReport, EvalError> {
    let clamped: Vec<f64> = raw_pred.iter().map(|p| p.clamp(0.0, 1.0)).collect();
    Ok(RegressionReport {
        n: gold.len(),
        pearson: pearson(gold, raw_pred)?,
        spearman: spearman(gold, raw_pred)?,
        mae: mean_absolute_error(gold, &clamped)?,
    })
}
