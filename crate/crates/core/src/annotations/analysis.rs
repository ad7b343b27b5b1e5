use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::corpus::Genre;
use crate::eval::pearson;

use super::aggregate::ComplexityLabel;
use super::AnnotationError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HistogramBucket {
    pub lo: f64,
    pub hi: f64,
    pub count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgreementHistogram {
    pub bin_width: f64,
    pub buckets: Vec<HistogramBucket>,
    /// Labels whose W is undefined (constant or too few scores).
    pub undefined: usize,
}

impl AgreementHistogram {
    pub fn mode(&self) -> Option<&HistogramBucket> {
        self.buckets.iter().filter(|b| b.count > 0).fold(
            None,
            |best: Option<&HistogramBucket>, b| match best {
                Some(x) if x.count >= b.count => Some(x),
                _ => Some(b),
            },
        )
    }

    pub fn to_tsv(&self) -> String {
        let mut out = String::from("bucket_start\tcount\n");
        for b in &self.buckets {
            out.push_str(&format!("{:.4}\t{}\n", b.lo, b.count));
        }
        out
    }
}

/// Counts of W over `[0, 1]` in buckets of `bin_width`; W = 1 falls in the last bucket.
pub fn agreement_histogram(
    labels: &[ComplexityLabel],
    bin_width: f64,
) -> Result<AgreementHistogram, AnnotationError> {
    if !(bin_width > 0.0 && bin_width <= 1.0) {
        return Err(AnnotationError::Config(format!(
            "bin width {bin_width} outside (0, 1]"
        )));
    }
    let ws: Vec<f64> = labels.iter().filter_map(|l| l.shapiro_w).collect();
    let undefined = labels.len() - ws.len();
    if ws.is_empty() {
        return Ok(AgreementHistogram {
            bin_width,
            buckets: Vec::new(),
            undefined,
        });
    }
    let n = (1.0 / bin_width - 1e-9).ceil() as usize;
    let mut buckets: Vec<HistogramBucket> = (0..n)
        .map(|i| HistogramBucket {
            lo: i as f64 * bin_width,
            hi: ((i + 1) as f64 * bin_width).min(1.0),
            count: 0,
        })
        .collect();
    for w in ws {
        let mut i = ((w / bin_width) + 1e-9).floor() as usize;
        i = i.min(n - 1);
        // guard against the fudge pushing a value past its bucket
        if i > 0 && w < buckets[i].lo - 1e-12 {
            i -= 1;
        }
        buckets[i].count += 1;
    }
    Ok(AgreementHistogram {
        bin_width,
        buckets,
        undefined,
    })
}

/// Pearson r between per-instance mean complexity and its standard deviation.
pub fn subjectivity_correlation(
    labels: &[ComplexityLabel],
) -> Result<Option<f64>, AnnotationError> {
    if labels.len() < 3 {
        return Err(AnnotationError::TooFew {
            needed: 3,
            found: labels.len(),
        });
    }
    let means: Vec<f64> = labels.iter().map(|l| l.mean).collect();
    let sds: Vec<f64> = labels.iter().map(|l| l.stdev).collect();
    pearson(&means, &sds).map_err(|e| AnnotationError::InvalidRecord(e.to_string()))
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct MeanCell {
    pub n: usize,
    pub mean: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub subset: String,
    pub overall: MeanCell,
    pub per_genre: BTreeMap<Genre, MeanCell>,
}

/// Mean complexity overall and per genre, for all targets, single words and multi-word expressions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComplexitySummary {
    pub rows: Vec<SummaryRow>,
}

impl ComplexitySummary {
    pub fn from_items<'a>(items: impl IntoIterator<Item = (&'a Genre, bool, f64)>) -> Self {
        let mut acc: BTreeMap<(usize, Option<Genre>), (usize, f64)> = BTreeMap::new();
        for (genre, is_mwe, c) in items {
            let subsets = [0, if is_mwe { 2 } else { 1 }];
            for s in subsets {
                for g in [None, Some(genre.clone())] {
                    let e = acc.entry((s, g)).or_default();
                    e.0 += 1;
                    e.1 += c;
                }
            }
        }
        let cell = |v: Option<&(usize, f64)>| match v {
            Some(&(n, sum)) if n > 0 => MeanCell {
                n,
                mean: sum / n as f64,
            },
            _ => MeanCell::default(),
        };
        let rows = ["all", "single", "mwe"]
            .iter()
            .enumerate()
            .map(|(s, name)| SummaryRow {
                subset: name.to_string(),
                overall: cell(acc.get(&(s, None))),
                per_genre: acc
                    .iter()
                    .filter_map(|((si, g), v)| match g {
                        Some(g) if *si == s => Some((g.clone(), cell(Some(v)))),
                        _ => None,
                    })
                    .collect(),
            })
            .collect();
        ComplexitySummary { rows }
    }

    pub fn row(&self, subset: &str) -> Option<&SummaryRow> {
        self.rows.iter().find(|r| r.subset == subset)
    }

    pub fn to_tsv(&self) -> String {
        let genres: Vec<Genre> = {
            let mut g: Vec<Genre> = self
                .rows
                .iter()
                .flat_map(|r| r.per_genre.keys().cloned())
                .collect();
            g.sort();
            g.dedup();
            g
        };
        let mut out = String::from("subset\tn\tmean");
        for g in &genres {
            out.push_str(&format!("\t{g}"));
        }
        out.push('\n');
        for r in &self.rows {
            out.push_str(&format!(
                "{}\t{}\t{:.4}",
                r.subset, r.overall.n, r.overall.mean
            ));
            for g in &genres {
                match r.per_genre.get(g) {
                    Some(c) => out.push_str(&format!("\t{:.4}", c.mean)),
                    None => out.push_str("\tNA"),
                }
            }
            out.push('\n');
        }
        out
    }
}
