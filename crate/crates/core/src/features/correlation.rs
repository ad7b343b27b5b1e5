use serde::{Deserialize, Serialize};

use crate::eval::spearman;

use super::layout::{FeatureLayout, GroupId};
use super::FeatureError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureCorrelation {
    pub column: usize,
    pub name: String,
    pub group: GroupId,
    /// `None` when the column (or the label) is constant.
    pub rho: Option<f64>,
}

/// Spearman rho of every column against the complexity labels.
pub fn correlation_report(
    layout: &FeatureLayout,
    rows: &[Vec<f64>],
    labels: &[f64],
) -> Result<Vec<FeatureCorrelation>, FeatureError> {
    if rows.len() < 3 {
        return Err(FeatureError::TooFew {
            needed: 3,
            found: rows.len(),
        });
    }
    if rows.len() != labels.len() {
        return Err(FeatureError::LayoutMismatch {
            expected: format!("{} labels", rows.len()),
            found: format!("{} labels", labels.len()),
        });
    }
    if let Some(r) = rows.iter().find(|r| r.len() != layout.len()) {
        return Err(FeatureError::LayoutMismatch {
            expected: format!("{} columns", layout.len()),
            found: format!("{} columns", r.len()),
        });
    }
    let mut column = vec![0.0; rows.len()];
    (0..layout.len())
        .map(|c| {
            for (dst, row) in column.iter_mut().zip(rows) {
                *dst = row[c];
            }
            let rho = spearman(&column, labels).map_err(|e| FeatureError::BadInstance {
                id: layout.names[c].clone(),
                message: e.to_string(),
            })?;
            Ok(FeatureCorrelation {
                column: c,
                name: layout.names[c].clone(),
                group: layout.group_of(c),
                rho,
            })
        })
        .collect()
}
