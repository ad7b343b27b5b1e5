use std::collections::BTreeSet;

use ndarray::Axis;
use serde::{Deserialize, Serialize};

use crate::features::{FeatureLayout, GroupId};

use super::dataset::Dataset;
use super::trainer::{cross_validate, stratified_folds, Trainer};
use super::EvalError;

/// Feature groups to remove: an explicit list, or everything except a list.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AblationSet {
    pub name: String,
    pub groups: BTreeSet<GroupId>,
    pub complement: bool,
}

fn parse_groups(spec: &str) -> Result<BTreeSet<GroupId>, EvalError> {
    let mut out = BTreeSet::new();
    for item in spec.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        if let Some((a, b)) = item.split_once('-') {
            let lo: GroupId = a
                .parse()
                .map_err(|_| EvalError::UnknownGroup(item.to_string()))?;
            let hi: GroupId = b
                .parse()
                .map_err(|_| EvalError::UnknownGroup(item.to_string()))?;
            let range: Vec<GroupId> = GroupId::VALUE_GROUPS
                .iter()
                .copied()
                .filter(|g| *g >= lo && *g <= hi)
                .collect();
            if range.is_empty() || lo == GroupId::Presence || hi == GroupId::Presence {
                return Err(EvalError::UnknownGroup(item.to_string()));
            }
            out.extend(range);
        } else {
            out.insert(
                item.parse()
                    .map_err(|_| EvalError::UnknownGroup(item.to_string()))?,
            );
        }
    }
    Ok(out)
}

impl AblationSet {
    /// `"E,F,G"`, `"A-S"`, `"all but C"`, or `""` / `"none"` for the empty set.
    pub fn parse(spec: &str) -> Result<Self, EvalError> {
        let name = spec.trim().to_string();
        let lower = name.to_ascii_lowercase();
        if lower.is_empty() || lower == "none" {
            return Ok(AblationSet {
                name: "none".into(),
                groups: BTreeSet::new(),
                complement: false,
            });
        }
        if let Some(rest) = lower.strip_prefix("all but") {
            let groups = parse_groups(rest)?;
            if groups.is_empty() {
                return Err(EvalError::UnknownGroup(name));
            }
            return Ok(AblationSet {
                name,
                groups,
                complement: true,
            });
        }
        Ok(AblationSet {
            groups: parse_groups(&name)?,
            name,
            complement: false,
        })
    }

    /// Columns removed from the full layout; presence flags go with their owner group.
    pub fn removed_columns(&self, layout: &FeatureLayout) -> Vec<usize> {
        let named: BTreeSet<usize> = self
            .groups
            .iter()
            .flat_map(|g| layout.columns_with_presence(*g))
            .collect();
        if self.complement {
            (0..layout.len()).filter(|c| !named.contains(c)).collect()
        } else {
            named.into_iter().collect()
        }
    }
}

/// The row set of the published ablation table, in order.
pub fn standard_ablation_sets() -> Vec<AblationSet> {
    [
        "A",
        "B",
        "C",
        "D",
        "E,F,G",
        "H,I,J",
        "M",
        "N",
        "P",
        "Q",
        "R",
        "S",
        "A-S",
        "T",
        "all but C",
    ]
    .iter()
    .map(|s| AblationSet::parse(s).expect("static set"))
    .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AblationResult {
    pub set: String,
    pub n_removed: usize,
    pub mae: f64,
    /// `mae - baseline_mae`; negative means the model does better without the set.
    pub delta_mae: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AblationReport {
    pub trainer: String,
    pub folds: usize,
    pub seed: u64,
    pub baseline_mae: f64,
    pub results: Vec<AblationResult>,
}

impl AblationReport {
    pub fn to_tsv(&self) -> String {
        let mut out = format!(
            "set\tremoved_columns\tmae\tdelta_mae\nbaseline\t0\t{:.6}\t0\n",
            self.baseline_mae
        );
        for r in &self.results {
            out.push_str(&format!(
                "{}\t{}\t{:.6}\t{:+.6}\n",
                r.set, r.n_removed, r.mae, r.delta_mae
            ));
        }
        out
    }
}

/// Retrains with each set's columns removed, on the same bin-stratified folds
/// and per-fold seeds as the all-features baseline.
pub fn ablate(
    data: &Dataset,
    sets: &[AblationSet],
    trainer: &dyn Trainer,
    folds: usize,
    seed: u64,
) -> Result<AblationReport, EvalError> {
    let fold_idx = stratified_folds(&data.y, folds, seed)?;
    let baseline = cross_validate(data.x.view(), &data.y, &fold_idx, trainer, seed)?;
    let mut results = Vec::new();
    for set in sets {
        let removed = set.removed_columns(&data.layout);
        let removed_set: BTreeSet<usize> = removed.iter().copied().collect();
        let kept: Vec<usize> = (0..data.layout.len())
            .filter(|c| !removed_set.contains(c))
            .collect();
        if kept.is_empty() {
            return Err(EvalError::InvalidArgument(format!(
                "set `{}` removes every column",
                set.name
            )));
        }
        let x = data.x.select(Axis(1), &kept);
        let cv = cross_validate(x.view(), &data.y, &fold_idx, trainer, seed)?;
        results.push(AblationResult {
            set: set.name.clone(),
            n_removed: removed.len(),
            mae: cv.mae,
            delta_mae: cv.mae - baseline.mae,
        });
    }
    Ok(AblationReport {
        trainer: trainer.describe(),
        folds,
        seed,
        baseline_mae: baseline.mae,
        results,
    })
}
