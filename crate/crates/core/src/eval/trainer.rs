use ndarray::{Array2, ArrayView2, Axis};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::models::{train_forest, train_regression, ComplexityBin, ForestParams};

use super::metrics::{expected_score, mean_absolute_error};
use super::split::{complement, kfold};
use super::EvalError;

const CV_LAYOUT: &str = "cv";

/// A learner evaluated on held-out rows: fits on the training rows and returns
/// one continuous complexity prediction per test row.
pub trait Trainer: Sync {
    fn describe(&self) -> String;

    fn fit_predict(
        &self,
        x_train: ArrayView2<f64>,
        y_train: &[f64],
        x_test: ArrayView2<f64>,
        cell_seed: u64,
    ) -> Result<Vec<f64>, EvalError>;
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegressionTrainer {
    pub ridge_lambda: f64,
}

impl Trainer for RegressionTrainer {
    fn describe(&self) -> String {
        format!("ridge regression (lambda = {})", self.ridge_lambda)
    }

    fn fit_predict(
        &self,
        x_train: ArrayView2<f64>,
        y_train: &[f64],
        x_test: ArrayView2<f64>,
        _: u64,
    ) -> Result<Vec<f64>, EvalError> {
        let m = train_regression(
            x_train,
            ndarray::ArrayView1::from(y_train),
            self.ridge_lambda,
            CV_LAYOUT,
        )?;
        Ok(m.predict_rows(CV_LAYOUT, x_test)?
            .into_iter()
            .map(|p| p.clamp(0.0, 1.0))
            .collect())
    }
}

/// Forest over five bins; the prediction is the vote-weighted mean of bin midpoints.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ForestTrainer {
    pub params: ForestParams,
}

impl Trainer for ForestTrainer {
    fn describe(&self) -> String {
        format!(
            "random forest ({} trees, features per split {}, max depth {}, min leaf {})",
            self.params.n_trees,
            self.params
                .features_per_split
                .map_or_else(|| "ceil(sqrt(d))".to_string(), |f| f.to_string()),
            self.params
                .max_depth
                .map_or_else(|| "unlimited".to_string(), |d| d.to_string()),
            self.params.min_leaf
        )
    }

    fn fit_predict(
        &self,
        x_train: ArrayView2<f64>,
        y_train: &[f64],
        x_test: ArrayView2<f64>,
        seed: u64,
    ) -> Result<Vec<f64>, EvalError> {
        let bins = y_train
            .iter()
            .map(|c| ComplexityBin::from_score(*c))
            .collect::<Result<Vec<_>, _>>()?;
        let f = train_forest(x_train, &bins, &self.params, seed, CV_LAYOUT)?;
        Ok(f.classify_rows(CV_LAYOUT, x_test)?
            .iter()
            .map(|c| expected_score(&c.probabilities))
            .collect())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvResult {
    pub mae: f64,
    pub fold_mae: Vec<f64>,
    /// Out-of-fold prediction per row.
    pub predictions: Vec<f64>,
}

/// Seed of fold `f`: identical across column subsets so comparisons share randomness.
pub fn cell_seed(seed: u64, cell: u64) -> u64 {
    seed ^ cell.wrapping_mul(0x9E37_79B9_7F4A_7C15)
}

/// Out-of-fold predictions over given folds.
pub fn cross_validate(
    x: ArrayView2<f64>,
    y: &[f64],
    folds: &[Vec<usize>],
    trainer: &dyn Trainer,
    seed: u64,
) -> Result<CvResult, EvalError> {
    let n = y.len();
    let per_fold: Vec<(Vec<usize>, Vec<f64>)> = folds
        .par_iter()
        .enumerate()
        .map(|(f, test)| {
            let train = complement(n, test);
            let xt: Array2<f64> = x.select(Axis(0), &train);
            let yt: Vec<f64> = train.iter().map(|&i| y[i]).collect();
            let xs = x.select(Axis(0), test);
            let pred = trainer.fit_predict(xt.view(), &yt, xs.view(), cell_seed(seed, f as u64))?;
            Ok((test.clone(), pred))
        })
        .collect::<Result<_, EvalError>>()?;
    let mut predictions = vec![0.0; n];
    let mut fold_mae = Vec::new();
    for (test, pred) in &per_fold {
        let gold: Vec<f64> = test.iter().map(|&i| y[i]).collect();
        fold_mae.push(mean_absolute_error(&gold, pred)?);
        for (&i, &p) in test.iter().zip(pred) {
            predictions[i] = p;
        }
    }
    let mae = mean_absolute_error(y, &predictions)?;
    Ok(CvResult {
        mae,
        fold_mae,
        predictions,
    })
}

/// Bin-stratified k folds over the labels.
pub fn stratified_folds(y: &[f64], k: usize, seed: u64) -> Result<Vec<Vec<usize>>, EvalError> {
    let bins = y
        .iter()
        .map(|c| ComplexityBin::from_score(*c))
        .collect::<Result<Vec<_>, _>>()?;
    kfold(y.len(), k, seed, Some(&bins))
}
