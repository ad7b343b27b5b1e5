use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::ModelError;

/// Share of annotators who find a target complex, in five equal bands.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ComplexityBin {
    Few,
    Some,
    Half,
    Most,
    All,
}

impl ComplexityBin {
    pub const ALL: [ComplexityBin; 5] = [
        ComplexityBin::Few,
        ComplexityBin::Some,
        ComplexityBin::Half,
        ComplexityBin::Most,
        ComplexityBin::All,
    ];

    /// `[0,0.2) [0.2,0.4) [0.4,0.6) [0.6,0.8) [0.8,1]`.
    pub fn from_score(c: f64) -> Result<Self, ModelError> {
        if !(0.0..=1.0).contains(&c) {
            return Err(ModelError::ScoreOutOfRange(c));
        }
        Ok(if c < 0.2 {
            ComplexityBin::Few
        } else if c < 0.4 {
            ComplexityBin::Some
        } else if c < 0.6 {
            ComplexityBin::Half
        } else if c < 0.8 {
            ComplexityBin::Most
        } else {
            ComplexityBin::All
        })
    }

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Option<Self> {
        Self::ALL.get(i).copied()
    }

    pub fn interval(self) -> (f64, f64) {
        match self {
            ComplexityBin::Few => (0.0, 0.2),
            ComplexityBin::Some => (0.2, 0.4),
            ComplexityBin::Half => (0.4, 0.6),
            ComplexityBin::Most => (0.6, 0.8),
            ComplexityBin::All => (0.8, 1.0),
        }
    }

    pub fn midpoint(self) -> f64 {
        let (lo, hi) = self.interval();
        (lo + hi) / 2.0
    }

    pub fn as_str(self) -> &'static str {
        match self {
            ComplexityBin::Few => "few",
            ComplexityBin::Some => "some",
            ComplexityBin::Half => "half",
            ComplexityBin::Most => "most",
            ComplexityBin::All => "all",
        }
    }
}

/// Convenience wrapper over [`ComplexityBin::from_score`].
pub fn bin_complexity(c: f64) -> Result<ComplexityBin, ModelError> {
    ComplexityBin::from_score(c)
}

impl fmt::Display for ComplexityBin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ComplexityBin {
    type Err = ModelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .iter()
            .copied()
            .find(|b| b.as_str().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| ModelError::UnknownBin(s.to_string()))
    }
}
