use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::ops::Range;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::layout::{FeatureLayout, GroupId};
use super::FeatureError;

const MAGIC: &[u8; 8] = b"LCPFMAT1";

/// Row-major feature rows with their layout and instance ids.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    pub layout: FeatureLayout,
    pub ids: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

/// JSON description written next to a binary matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixSidecar {
    pub layout_version: String,
    pub embedding_dim: usize,
    pub n_rows: usize,
    pub n_cols: usize,
    pub group_index: BTreeMap<GroupId, Range<usize>>,
    pub names: Vec<String>,
    pub ids: Vec<String>,
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> FeatureError + '_ {
    move |source| FeatureError::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn format_err(path: &Path, message: impl Into<String>) -> FeatureError {
    FeatureError::Format {
        path: path.to_path_buf(),
        message: message.into(),
    }
}

impl FeatureMatrix {
    pub fn from_rows(layout: FeatureLayout, ids: Vec<String>, rows: Vec<Vec<f64>>) -> Self {
        FeatureMatrix { layout, ids, rows }
    }

    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn n_cols(&self) -> usize {
        self.layout.len()
    }

    pub fn sidecar(&self) -> MatrixSidecar {
        MatrixSidecar {
            layout_version: self.layout.layout_version.clone(),
            embedding_dim: self.layout.embedding_dim,
            n_rows: self.n_rows(),
            n_cols: self.n_cols(),
            group_index: self.layout.group_index.clone(),
            names: self.layout.names.clone(),
            ids: self.ids.clone(),
        }
    }

    /// Sidecar path for a binary matrix: `<path>.json`.
    pub fn sidecar_path(path: &Path) -> PathBuf {
        let mut s = path.as_os_str().to_owned();
        s.push(".json");
        PathBuf::from(s)
    }

    pub fn to_tsv_string(&self) -> String {
        let mut out = String::from("id");
        for n in &self.layout.names {
            out.push('\t');
            out.push_str(n);
        }
        out.push('\n');
        for (id, row) in self.ids.iter().zip(&self.rows) {
            out.push_str(id);
            for v in row {
                out.push('\t');
                out.push_str(&v.to_string());
            }
            out.push('\n');
        }
        out
    }

    pub fn write_tsv(&self, path: &Path) -> Result<(), FeatureError> {
        fs::write(path, self.to_tsv_string()).map_err(io_err(path))
    }

    /// Reads a headered TSV; the embedding width is inferred from the `T.*` columns.
    pub fn read_tsv(path: &Path) -> Result<Self, FeatureError> {
        let text = fs::read_to_string(path).map_err(io_err(path))?;
        Self::parse_tsv(&text, path)
    }

    pub fn parse_tsv(text: &str, path: &Path) -> Result<Self, FeatureError> {
        let mut lines = text.lines();
        let header: Vec<&str> = lines
            .next()
            .ok_or_else(|| format_err(path, "empty file"))?
            .split('\t')
            .collect();
        if header.first() != Some(&"id") {
            return Err(format_err(path, "first header column must be `id`"));
        }
        let dim = header.iter().filter(|h| h.starts_with("T.")).count();
        let layout = FeatureLayout::new(dim);
        if header[1..] != layout.names.iter().map(String::as_str).collect::<Vec<_>>()[..] {
            return Err(FeatureError::LayoutMismatch {
                expected: layout.layout_version.clone(),
                found: "unrecognised header".into(),
            });
        }
        let mut ids = Vec::new();
        let mut rows = Vec::new();
        for (i, line) in lines.enumerate().filter(|(_, l)| !l.is_empty()) {
            let mut cells = line.split('\t');
            ids.push(cells.next().unwrap_or_default().to_string());
            let row = cells
                .map(|c| c.parse::<f64>())
                .collect::<Result<Vec<_>, _>>()
                .map_err(|e| format_err(path, format!("line {}: {e}", i + 2)))?;
            if row.len() != layout.len() {
                return Err(format_err(
                    path,
                    format!(
                        "line {}: {} values, expected {}",
                        i + 2,
                        row.len(),
                        layout.len()
                    ),
                ));
            }
            rows.push(row);
        }
        Ok(FeatureMatrix { layout, ids, rows })
    }

    /// Little-endian f64 matrix behind an 8-byte magic and row/column counts, plus a JSON sidecar.
    pub fn write_binary(&self, path: &Path) -> Result<(), FeatureError> {
        let mut buf = Vec::with_capacity(24 + 8 * self.n_rows() * self.n_cols());
        buf.extend_from_slice(MAGIC);
        buf.extend_from_slice(&(self.n_rows() as u64).to_le_bytes());
        buf.extend_from_slice(&(self.n_cols() as u64).to_le_bytes());
        for row in &self.rows {
            for v in row {
                buf.extend_from_slice(&v.to_le_bytes());
            }
        }
        let mut f = fs::File::create(path).map_err(io_err(path))?;
        f.write_all(&buf).map_err(io_err(path))?;
        let side = Self::sidecar_path(path);
        let json = serde_json::to_string_pretty(&self.sidecar()).expect("sidecar serializes");
        fs::write(&side, json).map_err(io_err(&side))
    }

    pub fn read_binary(path: &Path) -> Result<Self, FeatureError> {
        let side_path = Self::sidecar_path(path);
        let side_text = fs::read_to_string(&side_path).map_err(io_err(&side_path))?;
        let side: MatrixSidecar =
            serde_json::from_str(&side_text).map_err(|e| format_err(&side_path, e.to_string()))?;
        let layout = FeatureLayout::new(side.embedding_dim);
        if layout.layout_version != side.layout_version || layout.group_index != side.group_index {
            return Err(FeatureError::LayoutMismatch {
                expected: layout.layout_version,
                found: side.layout_version,
            });
        }
        let bytes = fs::read(path).map_err(io_err(path))?;
        if bytes.len() < 24 || &bytes[..8] != MAGIC {
            return Err(format_err(path, "not a feature matrix file"));
        }
        let word =
            |i: usize| u64::from_le_bytes(bytes[i..i + 8].try_into().expect("8 bytes")) as usize;
        let (n_rows, n_cols) = (word(8), word(16));
        if n_cols != layout.len()
            || n_rows != side.ids.len()
            || bytes.len() != 24 + 8 * n_rows * n_cols
        {
            return Err(format_err(path, "matrix size disagrees with its sidecar"));
        }
        let rows = bytes[24..]
            .chunks_exact(8 * n_cols.max(1))
            .take(n_rows)
            .map(|r| {
                r.chunks_exact(8)
                    .map(|b| f64::from_le_bytes(b.try_into().expect("8 bytes")))
                    .collect()
            })
            .collect();
        Ok(FeatureMatrix {
            layout,
            ids: side.ids,
            rows,
        })
    }
}
