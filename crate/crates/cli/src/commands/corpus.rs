use std::collections::BTreeMap;
use std::path::PathBuf;

use anyhow::Result;
use clap::Args;
use lcp_core::corpus::{
    parse_tagged, read_instances, select_targets, write_instances, FrequencyTable, Genre,
    GenreQuota, Quota, TaggedSentence,
};
use serde::{Deserialize, Serialize};

use super::{required, write_json};
use crate::config::{load_config, ResourcesConfig};
use crate::manifest::RunManifest;
use crate::{validation, Global};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CorpusSource {
    pub genre: String,
    pub path: PathBuf,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BuildCorpusConfig {
    pub corpora: Vec<CorpusSource>,
    pub frequency_table: Option<PathBuf>,
    /// Per-genre target counts, keyed by genre label.
    pub quota: BTreeMap<String, Quota>,
    pub seed: u64,
    pub out: Option<PathBuf>,
    pub report: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BuildCorpusArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    /// Tagged corpus as GENRE=PATH; repeatable.
    #[arg(long = "corpus", value_name = "GENRE=PATH")]
    corpora: Vec<String>,
    #[arg(long)]
    frequency_table: Option<PathBuf>,
    /// Single-word targets per genre; overrides the config quota.
    #[arg(long)]
    singles: Option<usize>,
    /// Two-word targets per genre; overrides the config quota.
    #[arg(long)]
    mwes: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Selection report JSON (default: `<out>.report.json`).
    #[arg(long)]
    report: Option<PathBuf>,
}

pub fn build_corpus(args: BuildCorpusArgs, global: &Global) -> Result<()> {
    let mut cfg: BuildCorpusConfig = load_config(args.config.as_deref())?;
    for spec in &args.corpora {
        let (genre, path) = spec
            .split_once('=')
            .ok_or_else(|| validation(format!("--corpus `{spec}` is not GENRE=PATH")))?;
        cfg.corpora.push(CorpusSource {
            genre: genre.to_string(),
            path: path.into(),
        });
    }
    if let Some(s) = args.seed {
        cfg.seed = s;
    }
    if cfg.corpora.is_empty() {
        return Err(validation(
            "no corpora: pass --corpus GENRE=PATH or set [[corpora]] in the config",
        ));
    }
    let out = required(args.out, cfg.out.clone(), "out")?;
    let table_path = required(
        args.frequency_table,
        cfg.frequency_table.clone(),
        "frequency-table",
    )?;
    let report_path = args
        .report
        .or(cfg.report.clone())
        .unwrap_or_else(|| PathBuf::from(format!("{}.report.json", out.display())));

    let mut manifest = RunManifest::new("build-corpus", args.config.as_deref(), global.threads)?;
    manifest.seeds.push(cfg.seed);
    manifest.input(&table_path)?;
    let table = FrequencyTable::load(&table_path)?;
    let mut sentences: Vec<TaggedSentence> = Vec::new();
    let mut quota = GenreQuota::new();
    for src in &cfg.corpora {
        let genre: Genre = src.genre.parse()?;
        manifest.input(&src.path)?;
        sentences.extend(parse_tagged(&src.path, genre.clone())?);
        let mut q = cfg
            .quota
            .get(&src.genre)
            .or_else(|| cfg.quota.get(genre.as_str()))
            .copied();
        if args.singles.is_some() || args.mwes.is_some() {
            let base = q.unwrap_or(Quota {
                singles: 0,
                mwes: 0,
            });
            q = Some(Quota {
                singles: args.singles.unwrap_or(base.singles),
                mwes: args.mwes.unwrap_or(base.mwes),
            });
        }
        let q = q.ok_or_else(|| validation(format!("no quota for genre `{genre}`")))?;
        quota.insert(genre, q);
    }
    let selection = select_targets(&sentences, &table, &quota, cfg.seed);
    for s in &selection.report.shortfalls {
        let band = s
            .band
            .map_or_else(|| "all bands".to_string(), |b| format!("band {b}"));
        log::info!(
            "shortfall: {} {:?} {}: requested {}, available {}",
            s.genre,
            s.kind,
            band,
            s.requested,
            s.available
        );
    }
    if !selection.report.shortfalls.is_empty() {
        log::warn!(
            "{} quota shortfalls; see {}",
            selection.report.shortfalls.len(),
            report_path.display()
        );
    }
    for w in &selection.report.warnings {
        log::warn!("{w}");
    }
    super::ensure_parent(&out)?;
    write_instances(&out, &selection.instances)?;
    write_json(&report_path, &selection.report)?;
    manifest.output(&out);
    manifest.output(&report_path);
    log::info!("selected {} targets", selection.instances.len());
    manifest.write(&global.manifest_path(&out))
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FeaturizeConfig {
    pub instances: Option<PathBuf>,
    pub out: Option<PathBuf>,
    pub resources: ResourcesConfig,
}

#[derive(Debug, Args)]
pub struct ResourceArgs {
    /// Lexicon table TSV; repeatable, earlier tables win conflicts.
    #[arg(long = "lexicon")]
    tables: Vec<PathBuf>,
    #[arg(long)]
    frequent_list: Option<PathBuf>,
    #[arg(long)]
    archaic_list: Option<PathBuf>,
    /// Whitespace-separated text embeddings.
    #[arg(long)]
    embeddings: Option<PathBuf>,
}

impl ResourceArgs {
    pub fn apply(&self, cfg: &mut ResourcesConfig) {
        if !self.tables.is_empty() {
            cfg.tables = self.tables.clone();
        }
        if self.frequent_list.is_some() {
            cfg.frequent_list = self.frequent_list.clone();
        }
        if self.archaic_list.is_some() {
            cfg.archaic_list = self.archaic_list.clone();
        }
        if self.embeddings.is_some() {
            cfg.embeddings = self.embeddings.clone();
        }
    }
}

#[derive(Debug, Args)]
pub struct FeaturizeArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    instances: Option<PathBuf>,
    /// Output matrix; `.bin` writes the binary format with a JSON sidecar, anything else TSV.
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    resources: ResourceArgs,
}

pub fn featurize(args: FeaturizeArgs, global: &Global) -> Result<()> {
    let mut cfg: FeaturizeConfig = load_config(args.config.as_deref())?;
    args.resources.apply(&mut cfg.resources);
    let instances_path = required(args.instances, cfg.instances, "instances")?;
    let out = required(args.out, cfg.out, "out")?;
    let mut manifest = RunManifest::new("featurize", args.config.as_deref(), global.threads)?;
    manifest.input(&instances_path)?;
    let instances = read_instances(&instances_path)?;
    let res = cfg.resources.load(&mut manifest)?;
    let matrix = res.featurizer().featurize_all(&instances)?;
    super::ensure_parent(&out)?;
    if out.extension().is_some_and(|e| e == "bin") {
        matrix.write_binary(&out)?;
        manifest.output(&out);
        manifest.output(&lcp_core::features::FeatureMatrix::sidecar_path(&out));
    } else {
        matrix.write_tsv(&out)?;
        manifest.output(&out);
    }
    log::info!("{} rows x {} columns", matrix.n_rows(), matrix.n_cols());
    manifest.write(&global.manifest_path(&out))
}
