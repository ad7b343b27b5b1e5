use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::Arc;

use anyhow::Result;
use clap::Args;
use lcp_core::annotations::instance_frequencies;
use lcp_core::corpus::{read_instances, FrequencyTable};
use lcp_service::{run_blocking, AnnotationService, ServiceConfig, SystemClock};
use serde::{Deserialize, Serialize};

use super::{ensure_parent, required};
use crate::config::load_config;
use crate::manifest::RunManifest;
use crate::{validation, Global};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ServeConfig {
    pub instances: Option<PathBuf>,
    /// Append-only event log; replayed on start.
    pub log: Option<PathBuf>,
    pub addr: String,
    /// Enables the frequency-correlation check in batch review.
    pub frequency_table: Option<PathBuf>,
    pub service: ServiceConfig,
}

impl Default for ServeConfig {
    fn default() -> Self {
        ServeConfig {
            instances: None,
            log: None,
            addr: "127.0.0.1:8080".into(),
            frequency_table: None,
            service: ServiceConfig::default(),
        }
    }
}

#[derive(Debug, Args)]
pub struct ServeArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    instances: Option<PathBuf>,
    #[arg(long)]
    log: Option<PathBuf>,
    #[arg(long)]
    addr: Option<String>,
    #[arg(long)]
    frequency_table: Option<PathBuf>,
    #[arg(long)]
    target: Option<u32>,
    #[arg(long)]
    batch_size: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
}

pub fn serve(args: ServeArgs, global: &Global) -> Result<()> {
    let mut cfg: ServeConfig = load_config(args.config.as_deref())?;
    if let Some(a) = args.addr {
        cfg.addr = a;
    }
    if let Some(t) = args.target {
        cfg.service.annotations_target = t;
    }
    if let Some(b) = args.batch_size {
        cfg.service.batch_size = b;
    }
    if let Some(s) = args.seed {
        cfg.service.seed = s;
    }
    let instances_path = required(args.instances, cfg.instances, "instances")?;
    let log_path = required(args.log, cfg.log, "log")?;
    let table = args.frequency_table.or(cfg.frequency_table);
    let addr: SocketAddr = cfg
        .addr
        .parse()
        .map_err(|e| validation(format!("bad address `{}`: {e}", cfg.addr)))?;

    let mut manifest = RunManifest::new("serve", args.config.as_deref(), global.threads)?;
    manifest.seeds.push(cfg.service.seed);
    manifest.input(&instances_path)?;
    let instances = read_instances(&instances_path)?;
    let frequencies = match &table {
        Some(t) => {
            manifest.input(t)?;
            Some(instance_frequencies(&instances, &FrequencyTable::load(t)?))
        }
        None => None,
    };
    ensure_parent(&log_path)?;
    let service = AnnotationService::open(
        instances,
        cfg.service,
        frequencies,
        Arc::new(SystemClock),
        &log_path,
    )?;
    manifest.output(&log_path);
    manifest.write(&global.manifest_path(&log_path))?;
    run_blocking(addr, service, global.threads.unwrap_or(2))?;
    Ok(())
}
