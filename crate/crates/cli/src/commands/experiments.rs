use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use clap::Args;
use lcp_core::eval::{
    ablate as run_ablation, classification_report, cross_genre_table, cross_genre_tsv,
    expected_score, rank_features as run_ranking, regression_report, split, standard_ablation_sets,
    AblationSet, Dataset, MetricReport, RegressionReport, SplitSpec,
};
use lcp_core::features::correlation_report;
use lcp_core::models::{
    train_forest, train_regression, ComplexityBin, ForestModel, RegressionModel,
};
use ndarray::ArrayView1;
use serde::{Deserialize, Serialize};

use super::{ensure_dir, ensure_parent, required, write_json, write_text};
use crate::config::{load_config, DataConfig, ModelConfig, ModelKind, ResourcesConfig, Subset};
use crate::manifest::RunManifest;
use crate::{validation, Global};

use super::corpus::ResourceArgs;

#[derive(Debug, Args)]
pub struct DataArgs {
    /// Released labelled data: a directory of TSVs or one TSV.
    #[arg(long)]
    released: Option<PathBuf>,
    /// Feature matrix (TSV, or `.bin` with sidecar); needs --labels and --instances.
    #[arg(long)]
    matrix: Option<PathBuf>,
    #[arg(long)]
    labels: Option<PathBuf>,
    #[arg(long)]
    instances: Option<PathBuf>,
    /// all, single or mwe.
    #[arg(long)]
    subset: Option<String>,
    /// Feature groups to zero out, e.g. "all but A,C,H-J".
    #[arg(long)]
    drop: Option<String>,
    #[command(flatten)]
    resources: ResourceArgs,
}

impl DataArgs {
    fn apply(&self, data: &mut DataConfig, resources: &mut ResourcesConfig) -> Result<()> {
        if self.released.is_some() {
            data.released = self.released.clone();
            data.matrix = None;
        }
        if self.matrix.is_some() {
            data.matrix = self.matrix.clone();
            data.released = None;
        }
        if self.labels.is_some() {
            data.labels = self.labels.clone();
        }
        if self.instances.is_some() {
            data.instances = self.instances.clone();
        }
        if let Some(s) = &self.subset {
            data.subset = match s.as_str() {
                "all" => Subset::All,
                "single" => Subset::Single,
                "mwe" => Subset::Mwe,
                other => {
                    return Err(validation(format!(
                        "unknown subset `{other}` (expected all, single or mwe)"
                    )))
                }
            };
        }
        if self.drop.is_some() {
            data.drop = self.drop.clone();
        }
        self.resources.apply(resources);
        Ok(())
    }
}

#[derive(Debug, Args)]
pub struct ModelArgs {
    /// regression or forest.
    #[arg(long = "model")]
    kind: Option<ModelKind>,
    #[arg(long)]
    ridge_lambda: Option<f64>,
    #[arg(long)]
    trees: Option<usize>,
    #[arg(long)]
    max_depth: Option<usize>,
}

impl ModelArgs {
    fn apply(&self, m: &mut ModelConfig) {
        if let Some(k) = self.kind {
            m.kind = k;
        }
        if let Some(l) = self.ridge_lambda {
            m.ridge_lambda = l;
        }
        if let Some(t) = self.trees {
            m.forest.n_trees = t;
        }
        if self.max_depth.is_some() {
            m.forest.max_depth = self.max_depth;
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum SavedModel {
    Regression { model: RegressionModel },
    Forest { model: ForestModel },
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    pub data: DataConfig,
    pub resources: ResourcesConfig,
    pub model: ModelConfig,
    pub seed: u64,
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    #[command(flatten)]
    data: DataArgs,
    #[command(flatten)]
    model: ModelArgs,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn bins(y: &[f64]) -> Result<Vec<ComplexityBin>> {
    Ok(y.iter()
        .map(|c| ComplexityBin::from_score(*c))
        .collect::<Result<_, _>>()?)
}

fn fit(data: &Dataset, model: &ModelConfig, seed: u64) -> Result<SavedModel> {
    let version = &data.layout.layout_version;
    Ok(match model.kind {
        ModelKind::Regression => SavedModel::Regression {
            model: train_regression(
                data.x.view(),
                ArrayView1::from(&data.y),
                model.ridge_lambda,
                version,
            )?,
        },
        ModelKind::Forest => SavedModel::Forest {
            model: train_forest(data.x.view(), &bins(&data.y)?, &model.forest, seed, version)?,
        },
    })
}

pub fn train(args: TrainArgs, global: &Global) -> Result<()> {
    let mut cfg: TrainConfig = load_config(args.config.as_deref())?;
    args.data.apply(&mut cfg.data, &mut cfg.resources)?;
    args.model.apply(&mut cfg.model);
    if let Some(s) = args.seed {
        cfg.seed = s;
    }
    let out = required(args.out, cfg.out.clone(), "out")?;
    let mut manifest = RunManifest::new("train", args.config.as_deref(), global.threads)?;
    manifest.seeds.push(cfg.seed);
    let data = cfg.data.load(&cfg.resources, &mut manifest)?;
    let model = fit(&data, &cfg.model, cfg.seed)?;
    ensure_parent(&out)?;
    write_text(
        &out,
        &(serde_json::to_string(&model).expect("model serializes") + "\n"),
    )?;
    manifest.output(&out);
    log::info!("trained on {} rows", data.len());
    manifest.write(&global.manifest_path(&out))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvaluateConfig {
    pub data: DataConfig,
    pub resources: ResourcesConfig,
    pub model: ModelConfig,
    pub seeds: Vec<u64>,
    pub train_fraction: f64,
    /// Score this saved model on the data instead of repeated holdout.
    pub saved_model: Option<PathBuf>,
    pub out_dir: Option<PathBuf>,
}

impl Default for EvaluateConfig {
    fn default() -> Self {
        EvaluateConfig {
            data: DataConfig::default(),
            resources: ResourcesConfig::default(),
            model: ModelConfig::default(),
            seeds: (0..10).collect(),
            train_fraction: 0.9,
            saved_model: None,
            out_dir: None,
        }
    }
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    #[command(flatten)]
    data: DataArgs,
    #[command(flatten)]
    model: ModelArgs,
    /// Comma-separated split seeds.
    #[arg(long, value_delimiter = ',')]
    seeds: Option<Vec<u64>>,
    #[arg(long)]
    train_fraction: Option<f64>,
    #[arg(long)]
    saved_model: Option<PathBuf>,
    #[arg(long)]
    out_dir: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HoldoutRow {
    pub seed: u64,
    pub n_train: usize,
    pub n_test: usize,
    pub pearson: Option<f64>,
    pub spearman: Option<f64>,
    pub mae: f64,
    pub weighted_f1: Option<f64>,
    pub accuracy: Option<f64>,
    pub mae_probability: Option<f64>,
    pub majority_f1: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeanSd {
    pub mean: f64,
    pub sd: f64,
    pub n: usize,
}

fn mean_sd(values: impl IntoIterator<Item = Option<f64>>) -> Option<MeanSd> {
    let v: Vec<f64> = values.into_iter().flatten().collect();
    if v.is_empty() {
        return None;
    }
    let m = v.iter().sum::<f64>() / v.len() as f64;
    let sd = (v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / v.len() as f64).sqrt();
    Some(MeanSd {
        mean: m,
        sd,
        n: v.len(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HoldoutSummary {
    pub model: ModelKind,
    pub n_rows: usize,
    pub pearson: Option<MeanSd>,
    pub mae: Option<MeanSd>,
    pub weighted_f1: Option<MeanSd>,
    pub mae_probability: Option<MeanSd>,
    pub majority_f1: Option<MeanSd>,
    pub runs: Vec<HoldoutRow>,
}

fn majority_f1(train: &[ComplexityBin], test: &[ComplexityBin]) -> Result<f64> {
    let mut counts = [0usize; 5];
    for b in train {
        counts[b.index()] += 1;
    }
    let best = (0..5)
        .max_by_key(|&k| (counts[k], std::cmp::Reverse(k)))
        .expect("five bins");
    let pred = vec![ComplexityBin::from_index(best).expect("bin index"); test.len()];
    Ok(classification_report(test, &pred)?.weighted_f1)
}

fn score_forest(model: &ForestModel, data: &Dataset) -> Result<MetricReport> {
    let version = &data.layout.layout_version;
    let out = model.classify_rows(version, data.x.view())?;
    let gold = bins(&data.y)?;
    let pred: Vec<ComplexityBin> = out.iter().map(|c| c.bin).collect();
    let probs: Vec<[f64; 5]> = out.iter().map(|c| c.probabilities).collect();
    let scores: Vec<f64> = probs.iter().map(expected_score).collect();
    Ok(classification_report(&gold, &pred)?
        .with_probabilities(&gold, &probs)?
        .with_scores(&data.y, &scores)?)
}

fn score_regression(model: &RegressionModel, data: &Dataset) -> Result<RegressionReport> {
    let raw = model.predict_rows(&data.layout.layout_version, data.x.view())?;
    Ok(regression_report(&data.y, &raw)?)
}

fn holdout_row(
    data: &Dataset,
    model: &ModelConfig,
    seed: u64,
    train_fraction: f64,
) -> Result<HoldoutRow> {
    let strata = bins(&data.y)?;
    let (tr, te) = split(
        data.len(),
        &SplitSpec {
            train_fraction,
            seed,
        },
        Some(&strata),
    )?;
    let train = data.subset(&tr);
    let test = data.subset(&te);
    let mut row = HoldoutRow {
        seed,
        n_train: train.len(),
        n_test: test.len(),
        pearson: None,
        spearman: None,
        mae: 0.0,
        weighted_f1: None,
        accuracy: None,
        mae_probability: None,
        majority_f1: None,
    };
    match fit(&train, model, seed)? {
        SavedModel::Regression { model } => {
            let r = score_regression(&model, &test)?;
            row.pearson = r.pearson;
            row.spearman = r.spearman;
            row.mae = r.mae;
        }
        SavedModel::Forest { model } => {
            let r = score_forest(&model, &test)?;
            row.pearson = r.pearson;
            row.spearman = r.spearman;
            row.mae = r.mae;
            row.weighted_f1 = Some(r.weighted_f1);
            row.accuracy = Some(r.accuracy);
            row.mae_probability = r.mae_probability;
            row.majority_f1 = Some(majority_f1(&bins(&train.y)?, &bins(&test.y)?)?);
        }
    }
    Ok(row)
}

fn opt(v: Option<f64>) -> String {
    v.map_or_else(|| "NA".to_string(), |x| format!("{x:.6}"))
}

fn holdout_tsv(rows: &[HoldoutRow]) -> String {
    let mut out =
        String::from("seed\tn_train\tn_test\tpearson\tspearman\tmae\tweighted_f1\taccuracy\tmae_probability\tmajority_f1\n");
    for r in rows {
        let _ = writeln!(
            out,
            "{}\t{}\t{}\t{}\t{}\t{:.6}\t{}\t{}\t{}\t{}",
            r.seed,
            r.n_train,
            r.n_test,
            opt(r.pearson),
            opt(r.spearman),
            r.mae,
            opt(r.weighted_f1),
            opt(r.accuracy),
            opt(r.mae_probability),
            opt(r.majority_f1)
        );
    }
    out
}

pub fn evaluate(args: EvaluateArgs, global: &Global) -> Result<()> {
    let mut cfg: EvaluateConfig = load_config(args.config.as_deref())?;
    args.data.apply(&mut cfg.data, &mut cfg.resources)?;
    args.model.apply(&mut cfg.model);
    if let Some(s) = args.seeds {
        cfg.seeds = s;
    }
    if let Some(f) = args.train_fraction {
        cfg.train_fraction = f;
    }
    if args.saved_model.is_some() {
        cfg.saved_model = args.saved_model;
    }
    let out_dir = required(args.out_dir, cfg.out_dir.clone(), "out-dir")?;
    let mut manifest = RunManifest::new("evaluate", args.config.as_deref(), global.threads)?;
    let data = cfg.data.load(&cfg.resources, &mut manifest)?;
    ensure_dir(&out_dir)?;

    if let Some(path) = &cfg.saved_model {
        manifest.input(path)?;
        let text = fs::read_to_string(path)
            .with_context(|| format!("cannot read model {}", path.display()))?;
        let saved: SavedModel = serde_json::from_str(&text)
            .map_err(|e| validation(format!("{}: {e}", path.display())))?;
        let metrics_path = out_dir.join("metrics.json");
        match saved {
            SavedModel::Regression { model } => {
                write_json(&metrics_path, &score_regression(&model, &data)?)?
            }
            SavedModel::Forest { model } => {
                manifest.seeds.push(model.seed);
                let report = score_forest(&model, &data)?;
                let per_class = out_dir.join("per_class.tsv");
                write_text(&per_class, &report.per_class_tsv())?;
                manifest.output(&per_class);
                write_json(&metrics_path, &report)?;
            }
        }
        manifest.output(&metrics_path);
        return manifest.write(&global.manifest_path(&out_dir));
    }

    if cfg.seeds.is_empty() {
        return Err(validation("no seeds to evaluate"));
    }
    manifest.seeds = cfg.seeds.clone();
    let rows = cfg
        .seeds
        .iter()
        .map(|&s| holdout_row(&data, &cfg.model, s, cfg.train_fraction))
        .collect::<Result<Vec<_>>>()?;
    let summary = HoldoutSummary {
        model: cfg.model.kind,
        n_rows: data.len(),
        pearson: mean_sd(rows.iter().map(|r| r.pearson)),
        mae: mean_sd(rows.iter().map(|r| Some(r.mae))),
        weighted_f1: mean_sd(rows.iter().map(|r| r.weighted_f1)),
        mae_probability: mean_sd(rows.iter().map(|r| r.mae_probability)),
        majority_f1: mean_sd(rows.iter().map(|r| r.majority_f1)),
        runs: rows,
    };
    let tsv = out_dir.join("evaluation.tsv");
    write_text(&tsv, &holdout_tsv(&summary.runs))?;
    let json = out_dir.join("summary.json");
    write_json(&json, &summary)?;
    manifest.output(&tsv);
    manifest.output(&json);
    if let Some(p) = &summary.pearson {
        log::info!(
            "mean Pearson {:.4} (sd {:.4}) over {} seeds",
            p.mean,
            p.sd,
            p.n
        );
    }
    if let Some(f) = &summary.weighted_f1 {
        log::info!("mean weighted F1 {:.4} over {} seeds", f.mean, f.n);
    }
    manifest.write(&global.manifest_path(&out_dir))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AblateConfig {
    pub data: DataConfig,
    pub resources: ResourcesConfig,
    pub model: ModelConfig,
    pub folds: usize,
    pub seed: u64,
    /// Group sets to remove, e.g. `"E,F,G"`, `"A-S"`, `"all but C"`.
    pub sets: Option<Vec<String>>,
    pub out: Option<PathBuf>,
}

impl Default for AblateConfig {
    fn default() -> Self {
        AblateConfig {
            data: DataConfig::default(),
            resources: ResourcesConfig::default(),
            model: ModelConfig::default(),
            folds: 10,
            seed: 0,
            sets: None,
            out: None,
        }
    }
}

#[derive(Debug, Args)]
pub struct AblateArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    #[command(flatten)]
    data: DataArgs,
    #[command(flatten)]
    model: ModelArgs,
    #[arg(long)]
    folds: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Group set to remove; repeatable. Defaults to the standard row set.
    #[arg(long = "set")]
    sets: Vec<String>,
    #[arg(long)]
    out: Option<PathBuf>,
}

pub fn ablate(args: AblateArgs, global: &Global) -> Result<()> {
    let mut cfg: AblateConfig = load_config(args.config.as_deref())?;
    args.data.apply(&mut cfg.data, &mut cfg.resources)?;
    args.model.apply(&mut cfg.model);
    if let Some(f) = args.folds {
        cfg.folds = f;
    }
    if let Some(s) = args.seed {
        cfg.seed = s;
    }
    if !args.sets.is_empty() {
        cfg.sets = Some(args.sets);
    }
    let out = required(args.out, cfg.out.clone(), "out")?;
    let sets = match &cfg.sets {
        Some(names) => names
            .iter()
            .map(|s| AblationSet::parse(s))
            .collect::<Result<Vec<_>, _>>()?,
        None => standard_ablation_sets(),
    };
    let mut manifest = RunManifest::new("ablate", args.config.as_deref(), global.threads)?;
    manifest.seeds.push(cfg.seed);
    let data = cfg.data.load(&cfg.resources, &mut manifest)?;
    let trainer = cfg.model.trainer();
    let report = run_ablation(&data, &sets, trainer.as_ref(), cfg.folds, cfg.seed)?;
    write_text(&out, &report.to_tsv())?;
    let json = PathBuf::from(format!("{}.json", out.display()));
    write_json(&json, &report)?;
    manifest.output(&out);
    manifest.output(&json);
    log::info!(
        "baseline MAE {:.4} over {} folds",
        report.baseline_mae,
        cfg.folds
    );
    manifest.write(&global.manifest_path(&out))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RankConfig {
    pub data: DataConfig,
    pub resources: ResourcesConfig,
    pub n_components: usize,
    pub top_k: usize,
    pub out_dir: Option<PathBuf>,
}

impl Default for RankConfig {
    fn default() -> Self {
        RankConfig {
            data: DataConfig::default(),
            resources: ResourcesConfig::default(),
            n_components: 10,
            top_k: 10,
            out_dir: None,
        }
    }
}

#[derive(Debug, Args)]
pub struct RankArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    #[command(flatten)]
    data: DataArgs,
    #[arg(long)]
    components: Option<usize>,
    #[arg(long)]
    top_k: Option<usize>,
    #[arg(long)]
    out_dir: Option<PathBuf>,
}

pub fn rank_features(args: RankArgs, global: &Global) -> Result<()> {
    let mut cfg: RankConfig = load_config(args.config.as_deref())?;
    args.data.apply(&mut cfg.data, &mut cfg.resources)?;
    if let Some(c) = args.components {
        cfg.n_components = c;
    }
    if let Some(k) = args.top_k {
        cfg.top_k = k;
    }
    let out_dir = required(args.out_dir, cfg.out_dir.clone(), "out-dir")?;
    let mut manifest = RunManifest::new("rank-features", args.config.as_deref(), global.threads)?;
    let data = cfg.data.load(&cfg.resources, &mut manifest)?;
    ensure_dir(&out_dir)?;
    let ranking = run_ranking(data.x.view(), &data.layout, cfg.n_components, cfg.top_k)?;
    let rows: Vec<Vec<f64>> = data.x.rows().into_iter().map(|r| r.to_vec()).collect();
    let correlations = correlation_report(&data.layout, &rows, &data.y)?;
    let mut corr = String::from("column\tname\tgroup\trho\n");
    for c in &correlations {
        let _ = writeln!(
            corr,
            "{}\t{}\t{}\t{}",
            c.column,
            c.name,
            c.group,
            opt(c.rho)
        );
    }
    let pca = out_dir.join("components.tsv");
    let corr_path = out_dir.join("correlations.tsv");
    let json = out_dir.join("ranking.json");
    write_text(&pca, &ranking.to_tsv())?;
    write_text(&corr_path, &corr)?;
    write_json(&json, &ranking)?;
    for p in [&pca, &corr_path, &json] {
        manifest.output(p);
    }
    manifest.write(&global.manifest_path(&out_dir))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CrossGenreConfig {
    pub data: DataConfig,
    pub resources: ResourcesConfig,
    pub ridge_lambda: f64,
    pub out: Option<PathBuf>,
}

impl Default for CrossGenreConfig {
    fn default() -> Self {
        CrossGenreConfig {
            data: DataConfig::default(),
            resources: ResourcesConfig::default(),
            ridge_lambda: crate::config::DEFAULT_RIDGE_LAMBDA,
            out: None,
        }
    }
}

#[derive(Debug, Args)]
pub struct CrossGenreArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    #[command(flatten)]
    data: DataArgs,
    #[arg(long)]
    ridge_lambda: Option<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

pub fn cross_genre(args: CrossGenreArgs, global: &Global) -> Result<()> {
    let mut cfg: CrossGenreConfig = load_config(args.config.as_deref())?;
    args.data.apply(&mut cfg.data, &mut cfg.resources)?;
    if let Some(l) = args.ridge_lambda {
        cfg.ridge_lambda = l;
    }
    let out = required(args.out, cfg.out.clone(), "out")?;
    let mut manifest = RunManifest::new("cross-genre", args.config.as_deref(), global.threads)?;
    let data = cfg.data.load(&cfg.resources, &mut manifest)?;
    let table = cross_genre_table(&data, cfg.ridge_lambda)?;
    write_text(&out, &cross_genre_tsv(&table))?;
    manifest.output(&out);
    manifest.write(&global.manifest_path(Path::new(&out)))
}
