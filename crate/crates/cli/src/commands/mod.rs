pub mod corpus;
pub mod experiments;
pub mod labels;
pub mod serve;

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};

pub fn ensure_parent(path: &Path) -> Result<()> {
    match path.parent().filter(|p| !p.as_os_str().is_empty()) {
        Some(parent) => ensure_dir(parent),
        None => Ok(()),
    }
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    ensure_parent(path)?;
    fs::write(path, text).with_context(|| format!("cannot write {}", path.display()))
}

pub fn write_json<T: serde::Serialize>(path: &Path, value: &T) -> Result<()> {
    write_text(
        path,
        &(serde_json::to_string_pretty(value).expect("value serializes") + "\n"),
    )
}

pub fn ensure_dir(path: &Path) -> Result<()> {
    fs::create_dir_all(path).with_context(|| format!("cannot create {}", path.display()))
}

/// Flag value if given, else the config value, else an error naming both.
pub fn required(flag: Option<PathBuf>, config: Option<PathBuf>, what: &str) -> Result<PathBuf> {
    flag.or(config).ok_or_else(|| {
        crate::validation(format!(
            "missing {what}: pass --{what} or set `{}` in the config",
            what.replace('-', "_")
        ))
    })
}
