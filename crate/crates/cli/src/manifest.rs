use std::fs;
use std::io::Read;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InputChecksum {
    pub path: PathBuf,
    pub sha256: String,
}

/// Record of one invocation: what was read, what was written, with which seeds.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub config_path: Option<PathBuf>,
    pub seeds: Vec<u64>,
    pub inputs: Vec<InputChecksum>,
    pub outputs: Vec<PathBuf>,
    pub tool_version: String,
    pub threads: Option<usize>,
}

pub fn sha256_file(path: &Path) -> Result<String> {
    let mut f = fs::File::open(path).with_context(|| format!("cannot open {}", path.display()))?;
    let mut hasher = Sha256::new();
    let mut buf = vec![0u8; 1 << 16];
    loop {
        let n = f
            .read(&mut buf)
            .with_context(|| format!("cannot read {}", path.display()))?;
        if n == 0 {
            break;
        }
        hasher.update(&buf[..n]);
    }
    Ok(hasher
        .finalize()
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect())
}

impl RunManifest {
    pub fn new(command: &str, config_path: Option<&Path>, threads: Option<usize>) -> Result<Self> {
        let mut m = RunManifest {
            command: command.to_string(),
            config_path: config_path.map(Path::to_path_buf),
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            threads,
            ..RunManifest::default()
        };
        if let Some(p) = config_path {
            m.input(p)?;
        }
        Ok(m)
    }

    /// Checksums a file, or every file beneath a directory.
    pub fn input(&mut self, path: &Path) -> Result<()> {
        if path.is_dir() {
            let mut entries: Vec<PathBuf> = fs::read_dir(path)
                .with_context(|| format!("cannot list {}", path.display()))?
                .map(|e| e.map(|e| e.path()))
                .collect::<std::io::Result<_>>()
                .with_context(|| format!("cannot list {}", path.display()))?;
            entries.sort();
            for e in entries {
                self.input(&e)?;
            }
            return Ok(());
        }
        if self.inputs.iter().any(|i| i.path == path) {
            return Ok(());
        }
        let sha256 = sha256_file(path)?;
        self.inputs.push(InputChecksum {
            path: path.to_path_buf(),
            sha256,
        });
        Ok(())
    }

    pub fn output(&mut self, path: &Path) {
        self.outputs.push(path.to_path_buf());
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let json = serde_json::to_string_pretty(self).expect("manifest serializes");
        fs::write(path, json + "\n")
            .with_context(|| format!("cannot write manifest {}", path.display()))
    }
}

/// `<path>.manifest.json` next to the primary output.
pub fn default_manifest_path(primary: &Path) -> PathBuf {
    if primary.is_dir() {
        return primary.join("manifest.json");
    }
    let mut s = primary.as_os_str().to_os_string();
    s.push(".manifest.json");
    PathBuf::from(s)
}
