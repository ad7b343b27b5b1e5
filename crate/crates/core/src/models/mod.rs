//! Predictors: standardized ridge regression for continuous complexity and a
//! bagged random-forest classifier over five complexity bins.

mod bins;
mod forest;
mod linalg;
mod regression;

pub use bins::{bin_complexity, ComplexityBin};
pub use forest::{train_forest, Classification, DecisionTree, ForestModel, ForestParams, Node};
pub use regression::{train_regression, RegressionModel, RegressionPrediction};

#[derive(Debug, thiserror::Error)]
pub enum ModelError {
    #[error("complexity {0} outside [0, 1]")]
    ScoreOutOfRange(f64),
    #[error("unknown complexity bin `{0}`")]
    UnknownBin(String),
    #[error("normal equations are singular at column {column} with ridge_lambda = {ridge_lambda}; use ridge_lambda > 0")]
    Singular { column: usize, ridge_lambda: f64 },
    #[error("matrix has {expected} rows but {found} labels")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("need at least {needed} training rows, found {found}")]
    TooFew { needed: usize, found: usize },
    #[error("non-finite value in training data")]
    NonFinite,
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("layout mismatch: model expects {expected}, got {found}")]
    LayoutMismatch { expected: String, found: String },
}
