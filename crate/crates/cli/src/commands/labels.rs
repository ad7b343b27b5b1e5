use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::PathBuf;

use anyhow::Result;
use clap::Args;
use lcp_core::annotations::{
    aggregate as aggregate_labels, agreement_histogram, filter_annotators, instance_frequencies,
    read_jsonl, read_labels, subjectivity_correlation, write_labels, ComplexitySummary, QcConfig,
};
use lcp_core::corpus::{read_instances, FrequencyTable, Genre};
use serde::{Deserialize, Serialize};

use super::{ensure_dir, ensure_parent, required, write_json, write_text};
use crate::config::{load_config, load_released};
use crate::manifest::RunManifest;
use crate::{validation, Global};

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AggregateConfig {
    pub input: Option<PathBuf>,
    pub out: Option<PathBuf>,
    /// With `frequency_table`, enables the annotator frequency-correlation gate.
    pub instances: Option<PathBuf>,
    pub frequency_table: Option<PathBuf>,
    pub qc: QcConfig,
}

#[derive(Debug, Args)]
pub struct AggregateArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    /// Annotation log (JSON lines).
    #[arg(long = "in")]
    input: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    instances: Option<PathBuf>,
    #[arg(long)]
    frequency_table: Option<PathBuf>,
    #[arg(long)]
    min_valid_annotations: Option<usize>,
    #[arg(long)]
    min_elapsed: Option<f64>,
}

pub fn aggregate(args: AggregateArgs, global: &Global) -> Result<()> {
    let mut cfg: AggregateConfig = load_config(args.config.as_deref())?;
    if let Some(n) = args.min_valid_annotations {
        cfg.qc.min_valid_annotations = n;
    }
    if let Some(t) = args.min_elapsed {
        cfg.qc.min_elapsed = t;
    }
    cfg.qc.validate()?;
    let input = required(args.input, cfg.input, "in")?;
    let out = required(args.out, cfg.out, "out")?;
    let instances = args.instances.or(cfg.instances);
    let table = args.frequency_table.or(cfg.frequency_table);

    let mut manifest = RunManifest::new("aggregate", args.config.as_deref(), global.threads)?;
    manifest.input(&input)?;
    let records = read_jsonl(&input)?;
    let frequencies = match (instances, table) {
        (Some(i), Some(t)) => {
            manifest.input(&i)?;
            manifest.input(&t)?;
            Some(instance_frequencies(
                &read_instances(&i)?,
                &FrequencyTable::load(&t)?,
            ))
        }
        (None, None) => None,
        _ => {
            return Err(validation(
                "the frequency gate needs both instances and frequency_table",
            ))
        }
    };
    let (kept, qc) = filter_annotators(&records, &cfg.qc, frequencies.as_ref());
    for r in &qc.rejected {
        let reasons: Vec<&str> = r.reasons.iter().map(|x| x.label()).collect();
        log::warn!(
            "rejected annotator {} ({} records): {}",
            r.annotator_id,
            r.n_records,
            reasons.join(", ")
        );
    }
    let agg = aggregate_labels(&kept, &cfg.qc)?;
    for d in &agg.dropped {
        log::warn!("dropped instance {}: {}", d.instance_id, d.reason);
    }
    ensure_parent(&out)?;
    write_labels(&out, &agg.labels)?;
    let dropped_path = PathBuf::from(format!("{}.dropped.tsv", out.display()));
    let mut dropped = String::from("instance_id\tn\treason\n");
    for d in &agg.dropped {
        let _ = writeln!(dropped, "{}\t{}\t{}", d.instance_id, d.n, d.reason);
    }
    write_text(&dropped_path, &dropped)?;
    let qc_path = PathBuf::from(format!("{}.qc.json", out.display()));
    write_json(&qc_path, &qc)?;
    for p in [&out, &dropped_path, &qc_path] {
        manifest.output(p);
    }
    log::info!(
        "{} labels from {} of {} records; {} instances dropped",
        agg.labels.len(),
        qc.n_records_kept,
        qc.n_records_in,
        agg.dropped.len()
    );
    manifest.write(&global.manifest_path(&out))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AnalyzeConfig {
    pub labels: Option<PathBuf>,
    /// Instances for the per-genre table when reading `labels`.
    pub instances: Option<PathBuf>,
    /// Released labelled data (directory or TSV) for the per-genre table.
    pub released: Option<PathBuf>,
    pub bin_width: f64,
    pub out_dir: Option<PathBuf>,
}

impl Default for AnalyzeConfig {
    fn default() -> Self {
        AnalyzeConfig {
            labels: None,
            instances: None,
            released: None,
            bin_width: 0.05,
            out_dir: None,
        }
    }
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    labels: Option<PathBuf>,
    #[arg(long)]
    instances: Option<PathBuf>,
    #[arg(long)]
    released: Option<PathBuf>,
    #[arg(long)]
    bin_width: Option<f64>,
    #[arg(long)]
    out_dir: Option<PathBuf>,
}

#[derive(Debug, Serialize)]
struct AnalysisSummary {
    n_labels: usize,
    subjectivity_r: Option<f64>,
    agreement_mode: Option<(f64, f64)>,
    undefined_w: usize,
    summary: Option<ComplexitySummary>,
}

pub fn analyze(args: AnalyzeArgs, global: &Global) -> Result<()> {
    let mut cfg: AnalyzeConfig = load_config(args.config.as_deref())?;
    cfg.labels = args.labels.or(cfg.labels);
    cfg.instances = args.instances.or(cfg.instances);
    cfg.released = args.released.or(cfg.released);
    if let Some(w) = args.bin_width {
        cfg.bin_width = w;
    }
    let out_dir = required(args.out_dir, cfg.out_dir.clone(), "out-dir")?;
    if cfg.labels.is_none() && cfg.released.is_none() {
        return Err(validation(
            "nothing to analyze: pass --labels or --released",
        ));
    }
    let mut manifest =
        RunManifest::new("analyze-agreement", args.config.as_deref(), global.threads)?;
    ensure_dir(&out_dir)?;
    let mut result = AnalysisSummary {
        n_labels: 0,
        subjectivity_r: None,
        agreement_mode: None,
        undefined_w: 0,
        summary: None,
    };
    if let Some(path) = &cfg.labels {
        manifest.input(path)?;
        let labels = read_labels(path)?;
        result.n_labels = labels.len();
        let hist = agreement_histogram(&labels, cfg.bin_width)?;
        result.agreement_mode = hist.mode().map(|b| (b.lo, b.hi));
        result.undefined_w = hist.undefined;
        result.subjectivity_r = subjectivity_correlation(&labels)?;
        let hist_path = out_dir.join("agreement.tsv");
        write_text(&hist_path, &hist.to_tsv())?;
        manifest.output(&hist_path);
        if let Some(ipath) = &cfg.instances {
            manifest.input(ipath)?;
            let meta: HashMap<String, (Genre, bool)> = read_instances(ipath)?
                .into_iter()
                .map(|i| (i.id, (i.genre, i.is_mwe)))
                .collect();
            let items: Vec<(&Genre, bool, f64)> = labels
                .iter()
                .filter_map(|l| meta.get(&l.instance_id).map(|(g, m)| (g, *m, l.mean)))
                .collect();
            result.summary = Some(ComplexitySummary::from_items(items));
        }
    }
    if let Some(path) = &cfg.released {
        manifest.input(path)?;
        let entries = load_released(path)?;
        result.summary = Some(ComplexitySummary::from_items(
            entries.iter().map(|e| (&e.genre, e.is_mwe, e.complexity)),
        ));
    }
    if let Some(summary) = &result.summary {
        let p = out_dir.join("summary.tsv");
        write_text(&p, &summary.to_tsv())?;
        manifest.output(&p);
    }
    let json_path = out_dir.join("analysis.json");
    write_json(&json_path, &result)?;
    manifest.output(&json_path);
    if let Some(r) = result.subjectivity_r {
        log::info!("subjectivity correlation r = {r:.4}");
    }
    manifest.write(&global.manifest_path(&out_dir))
}
