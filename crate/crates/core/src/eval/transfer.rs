use std::collections::BTreeSet;

use ndarray::ArrayView1;
use serde::{Deserialize, Serialize};

use crate::corpus::Genre;
use crate::models::train_regression;

use super::correlation::pearson;
use super::dataset::Dataset;
use super::metrics::mean_absolute_error;
use super::split::{split, SplitSpec};
use super::EvalError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrossGenreResult {
    pub train: Vec<Genre>,
    pub test: Genre,
    pub n_train: usize,
    pub n_test: usize,
    pub pearson: Option<f64>,
}

/// Trains ridge regression on all single-word rows of `train` genres and
/// reports Pearson r on all single-word rows of `test`.
pub fn cross_genre(
    data: &Dataset,
    train: &BTreeSet<Genre>,
    test: &Genre,
    ridge_lambda: f64,
) -> Result<CrossGenreResult, EvalError> {
    if train.is_empty() {
        return Err(EvalError::InvalidArgument("no training genre".into()));
    }
    if train.contains(test) {
        return Err(EvalError::InvalidArgument(format!(
            "test genre `{test}` is also a training genre"
        )));
    }
    let tr = data.filter(|i| !data.is_mwe[i] && train.contains(&data.genres[i]));
    let te = data.filter(|i| !data.is_mwe[i] && data.genres[i] == *test);
    if tr.len() < 2 || te.len() < 3 {
        return Err(EvalError::EmptyPartition(format!(
            "{} training rows, {} test rows",
            tr.len(),
            te.len()
        )));
    }
    let model = train_regression(
        tr.x.view(),
        ArrayView1::from(&tr.y),
        ridge_lambda,
        &data.layout.layout_version,
    )?;
    let pred = model.predict_rows(&data.layout.layout_version, te.x.view())?;
    Ok(CrossGenreResult {
        train: train.iter().cloned().collect(),
        test: test.clone(),
        n_train: tr.len(),
        n_test: te.len(),
        pearson: pearson(&te.y, &pred)?,
    })
}

/// Every single-genre and two-genre training configuration for each genre present.
pub fn cross_genre_table(
    data: &Dataset,
    ridge_lambda: f64,
) -> Result<Vec<CrossGenreResult>, EvalError> {
    let genres: BTreeSet<Genre> = data.genres.iter().cloned().collect();
    let mut out = Vec::new();
    for test in &genres {
        let others: Vec<&Genre> = genres.iter().filter(|g| *g != test).collect();
        out.push(cross_genre(
            data,
            &others.iter().map(|g| (*g).clone()).collect(),
            test,
            ridge_lambda,
        )?);
        if others.len() > 1 {
            for g in &others {
                out.push(cross_genre(
                    data,
                    &BTreeSet::from([(*g).clone()]),
                    test,
                    ridge_lambda,
                )?);
            }
        }
    }
    Ok(out)
}

pub fn cross_genre_tsv(results: &[CrossGenreResult]) -> String {
    let mut out = String::from("train\ttest\tn_train\tn_test\tpearson\n");
    for r in results {
        let train: Vec<String> = r.train.iter().map(|g| g.to_string()).collect();
        let p = r
            .pearson
            .map_or_else(|| "NA".to_string(), |p| format!("{p:.4}"));
        out.push_str(&format!(
            "{}\t{}\t{}\t{}\t{}\n",
            train.join("+"),
            r.test,
            r.n_train,
            r.n_test,
            p
        ));
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HoldoutRun {
    pub seed: u64,
    pub pearson: Option<f64>,
    pub mae: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HoldoutSummary {
    pub runs: Vec<HoldoutRun>,
    pub mean_pearson: Option<f64>,
    pub sd_pearson: Option<f64>,
    pub mean_mae: f64,
}

/// Repeated seeded train/test splits of ridge regression.
pub fn repeated_holdout(
    data: &Dataset,
    seeds: &[u64],
    train_fraction: f64,
    ridge_lambda: f64,
) -> Result<HoldoutSummary, EvalError> {
    if seeds.is_empty() {
        return Err(EvalError::InvalidArgument("no seeds".into()));
    }
    let layout = &data.layout.layout_version;
    let mut runs = Vec::new();
    for &seed in seeds {
        let (tr, te) = split::<u8>(
            data.len(),
            &SplitSpec {
                train_fraction,
                seed,
            },
            None,
        )?;
        let train = data.subset(&tr);
        let test = data.subset(&te);
        let model = train_regression(
            train.x.view(),
            ArrayView1::from(&train.y),
            ridge_lambda,
            layout,
        )?;
        let pred = model.predict_rows(layout, test.x.view())?;
        let clamped: Vec<f64> = pred.iter().map(|p| p.clamp(0.0, 1.0)).collect();
        runs.push(HoldoutRun {
            seed,
            pearson: if test.len() >= 3 {
                pearson(&test.y, &pred)?
            } else {
                None
            },
            mae: mean_absolute_error(&test.y, &clamped)?,
        });
    }
    let rs: Vec<f64> = runs.iter().filter_map(|r| r.pearson).collect();
    let (mean_pearson, sd_pearson) = if rs.len() == runs.len() {
        let m = rs.iter().sum::<f64>() / rs.len() as f64;
        let sd = (rs.iter().map(|r| (r - m).powi(2)).sum::<f64>() / rs.len() as f64).sqrt();
        (Some(m), Some(sd))
    } else {
        (None, None)
    };
    let mean_mae = runs.iter().map(|r| r.mae).sum::<f64>() / runs.len() as f64;
    Ok(HoldoutSummary {
        runs,
        mean_pearson,
        sd_pearson,
        mean_mae,
    })
}
