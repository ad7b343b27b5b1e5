//! Metrics, seeded splits, and the experiment drivers: group ablation,
//! principal-component feature ranking and cross-genre transfer.

mod ablation;
mod correlation;
mod dataset;
mod metrics;
mod pca;
mod split;
mod trainer;
mod transfer;

pub use ablation::{ablate, standard_ablation_sets, AblationReport, AblationResult, AblationSet};
pub use correlation::{average_ranks, pearson, spearman};
pub use dataset::Dataset;
pub use metrics::{
    classification_report, expected_score, mean_absolute_error, regression_report, ClassMetrics,
    MetricReport, RegressionReport,
};
pub use pca::{
    leading_eigenpairs, rank_features, Eigenpair, FeatureRanking, Loading, RankedComponent,
    PCA_TOLERANCE,
};
pub use split::{complement, kfold, split, SplitSpec};
pub use trainer::{
    cell_seed, cross_validate, stratified_folds, CvResult, ForestTrainer, RegressionTrainer,
    Trainer,
};
pub use transfer::{
    cross_genre, cross_genre_table, cross_genre_tsv, repeated_holdout, CrossGenreResult,
    HoldoutRun, HoldoutSummary,
};

use crate::models::ModelError;

#[derive(Debug, thiserror::Error)]
pub enum EvalError {
    #[error("length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("need at least {needed} values, found {found}")]
    TooFew { needed: usize, found: usize },
    #[error("non-finite value")]
    NonFinite,
    #[error("unknown feature group `{0}`")]
    UnknownGroup(String),
    #[error("empty partition: {0}")]
    EmptyPartition(String),
    #[error("{0}")]
    InvalidArgument(String),
    #[error(transparent)]
    Model(#[from] ModelError),
}
