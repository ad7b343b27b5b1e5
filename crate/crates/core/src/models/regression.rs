use ndarray::{ArrayView1, ArrayView2, Axis};
use serde::{Deserialize, Serialize};

use super::linalg::{cholesky, cholesky_solve};
use super::ModelError;

/// Linear model stored in raw feature units.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegressionModel {
    pub layout_version: String,
    pub weights: Vec<f64>,
    pub intercept: f64,
    pub ridge_lambda: f64,
    /// Coefficients on the standardized scale used for the solve (zero for constant columns).
    pub standardized_weights: Vec<f64>,
    pub feature_means: Vec<f64>,
    pub feature_stdevs: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegressionPrediction {
    pub raw: f64,
    /// `raw` clamped to `[0, 1]`.
    pub clamped: f64,
}

pub(crate) fn check_matrix(x: ArrayView2<f64>, n_labels: usize) -> Result<(), ModelError> {
    if x.nrows() != n_labels {
        return Err(ModelError::DimensionMismatch {
            expected: x.nrows(),
            found: n_labels,
        });
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(ModelError::NonFinite);
    }
    Ok(())
}

/// Ridge regression on standardized features: minimizes
/// `|y - y_mean - Z b|^2 + lambda |b|^2` with `Z` the train-standardized
/// columns, then maps `b` back to raw units. Constant columns get weight 0.
pub fn train_regression(
    x: ArrayView2<f64>,
    y: ArrayView1<f64>,
    ridge_lambda: f64,
    layout_version: &str,
) -> Result<RegressionModel, ModelError> {
    check_matrix(x, y.len())?;
    if y.iter().any(|v| !v.is_finite()) {
        return Err(ModelError::NonFinite);
    }
    if !(ridge_lambda >= 0.0 && ridge_lambda.is_finite()) {
        return Err(ModelError::InvalidParams(format!(
            "ridge_lambda {ridge_lambda} must be >= 0"
        )));
    }
    let (n, d) = x.dim();
    if n < 2 {
        return Err(ModelError::TooFew {
            needed: 2,
            found: n,
        });
    }
    let means = x.mean_axis(Axis(0)).expect("n >= 2");
    let stdevs: Vec<f64> = (0..d)
        .map(|j| {
            let col = x.column(j);
            if col.iter().all(|v| *v == col[0]) {
                0.0
            } else {
                let m = means[j];
                (col.iter().map(|v| (v - m).powi(2)).sum::<f64>() / n as f64).sqrt()
            }
        })
        .collect();
    let active: Vec<usize> = (0..d).filter(|&j| stdevs[j] > 0.0).collect();
    let p = active.len();
    let y_mean = y.sum() / n as f64;

    let mut z = vec![0.0; n * p];
    for i in 0..n {
        for (k, &j) in active.iter().enumerate() {
            z[i * p + k] = (x[[i, j]] - means[j]) / stdevs[j];
        }
    }
    let mut gram = vec![0.0; p * p];
    let mut rhs = vec![0.0; p];
    for i in 0..n {
        let row = &z[i * p..(i + 1) * p];
        let yc = y[i] - y_mean;
        for a in 0..p {
            let ra = row[a];
            if ra == 0.0 {
                continue;
            }
            rhs[a] += ra * yc;
            for b in 0..=a {
                gram[a * p + b] += ra * row[b];
            }
        }
    }
    for a in 0..p {
        for b in 0..a {
            gram[b * p + a] = gram[a * p + b];
        }
        gram[a * p + a] += ridge_lambda;
    }
    let beta = if p == 0 {
        Vec::new()
    } else {
        let l = cholesky(&gram, p).map_err(|k| ModelError::Singular {
            column: active[k],
            ridge_lambda,
        })?;
        cholesky_solve(&l, p, &rhs)
    };

    let mut weights = vec![0.0; d];
    let mut standardized = vec![0.0; d];
    for (k, &j) in active.iter().enumerate() {
        standardized[j] = beta[k];
        weights[j] = beta[k] / stdevs[j];
    }
    let intercept = y_mean - (0..d).map(|j| weights[j] * means[j]).sum::<f64>();
    if !intercept.is_finite() || weights.iter().any(|w| !w.is_finite()) {
        return Err(ModelError::NonFinite);
    }
    Ok(RegressionModel {
        layout_version: layout_version.to_string(),
        weights,
        intercept,
        ridge_lambda,
        standardized_weights: standardized,
        feature_means: means.to_vec(),
        feature_stdevs: stdevs,
    })
}

impl RegressionModel {
    pub fn n_features(&self) -> usize {
        self.weights.len()
    }

    pub fn check_layout(&self, layout_version: &str, len: usize) -> Result<(), ModelError> {
        if layout_version != self.layout_version || len != self.weights.len() {
            return Err(ModelError::LayoutMismatch {
                expected: format!("{} ({} features)", self.layout_version, self.weights.len()),
                found: format!("{layout_version} ({len} features)"),
            });
        }
        Ok(())
    }

    pub fn predict(
        &self,
        layout_version: &str,
        x: &[f64],
    ) -> Result<RegressionPrediction, ModelError> {
        self.check_layout(layout_version, x.len())?;
        Ok(self.predict_unchecked(x))
    }

    pub(crate) fn predict_unchecked(&self, x: &[f64]) -> RegressionPrediction {
        let raw = self.intercept + self.weights.iter().zip(x).map(|(w, v)| w * v).sum::<f64>();
        RegressionPrediction {
            raw,
            clamped: raw.clamp(0.0, 1.0),
        }
    }

    /// Raw predictions for every row of a matrix.
    pub fn predict_rows(
        &self,
        layout_version: &str,
        x: ArrayView2<f64>,
    ) -> Result<Vec<f64>, ModelError> {
        self.check_layout(layout_version, x.ncols())?;
        Ok(x.rows()
            .into_iter()
            .map(|r| {
                self.intercept
                    + self
                        .weights
                        .iter()
                        .zip(r.iter())
                        .map(|(w, v)| w * v)
                        .sum::<f64>()
            })
            .collect())
    }
}
