use std::collections::HashMap;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::CorpusError;

/// Inclusive count range of one sampling band.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FrequencyBand {
    pub index: usize,
    pub lo: u64,
    pub hi: u64,
}

impl FrequencyBand {
    pub fn contains(&self, freq: u64) -> bool {
        (self.lo..=self.hi).contains(&freq)
    }
}

pub const FREQUENCY_BANDS: [FrequencyBand; 8] = [
    FrequencyBand {
        index: 0,
        lo: 2,
        hi: 4,
    },
    FrequencyBand {
        index: 1,
        lo: 5,
        hi: 10,
    },
    FrequencyBand {
        index: 2,
        lo: 11,
        hi: 50,
    },
    FrequencyBand {
        index: 3,
        lo: 51,
        hi: 250,
    },
    FrequencyBand {
        index: 4,
        lo: 251,
        hi: 500,
    },
    FrequencyBand {
        index: 5,
        lo: 501,
        hi: 1400,
    },
    FrequencyBand {
        index: 6,
        lo: 1401,
        hi: 3100,
    },
    FrequencyBand {
        index: 7,
        lo: 3101,
        hi: 10000,
    },
];

/// Band for a raw count; `None` for hapaxes, unseen words and counts above 10,000.
pub fn assign_frequency_band(freq: u64) -> Option<FrequencyBand> {
    FREQUENCY_BANDS.iter().copied().find(|b| b.contains(freq))
}

/// Case-folded word frequency list.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct FrequencyTable {
    counts: HashMap<String, u64>,
}

impl FrequencyTable {
    /// Loads a two-column `word\tcount` TSV. A non-numeric count on the first
    /// line is treated as a header. Case variants are summed.
    pub fn load(path: &Path) -> Result<Self, CorpusError> {
        let text = fs::read_to_string(path).map_err(|source| CorpusError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::parse(&text, path)
    }

    pub fn parse(text: &str, path: &Path) -> Result<Self, CorpusError> {
        let mut table = FrequencyTable::default();
        for (idx, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let cols: Vec<&str> = line.split('\t').collect();
            if cols.len() < 2 {
                return Err(CorpusError::Parse {
                    path: path.to_path_buf(),
                    line: idx + 1,
                    message: "expected `word<TAB>count`".into(),
                });
            }
            let count = match cols[1].trim().parse::<f64>() {
                Ok(c) if c.is_finite() && c >= 0.0 => c.round() as u64,
                _ if idx == 0 => continue,
                _ => {
                    return Err(CorpusError::Parse {
                        path: path.to_path_buf(),
                        line: idx + 1,
                        message: format!("invalid count `{}`", cols[1]),
                    })
                }
            };
            table.add(cols[0].trim(), count);
        }
        Ok(table)
    }

    pub fn add(&mut self, word: &str, count: u64) {
        *self.counts.entry(word.to_lowercase()).or_insert(0) += count;
    }

    pub fn get(&self, word: &str) -> Option<u64> {
        self.counts.get(&word.to_lowercase()).copied()
    }

    /// Minimum constituent count, the banding frequency of a multi-word target.
    pub fn get_phrase(&self, words: &[&str]) -> Option<u64> {
        words
            .iter()
            .map(|w| self.get(w))
            .collect::<Option<Vec<_>>>()?
            .into_iter()
            .min()
    }

    pub fn len(&self) -> usize {
        self.counts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }
}

impl FromIterator<(String, u64)> for FrequencyTable {
    fn from_iter<I: IntoIterator<Item = (String, u64)>>(iter: I) -> Self {
        let mut table = FrequencyTable::default();
        for (w, c) in iter {
            table.add(&w, c);
        }
        table
    }
}
