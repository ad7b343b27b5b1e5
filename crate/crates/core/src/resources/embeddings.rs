use std::collections::HashMap;
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;

use super::ResourceError;

/// Word vectors read from the plain-text `word v1 v2 ...` format.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct EmbeddingTable {
    dimension: usize,
    vectors: HashMap<String, Vec<f32>>,
    folded: HashMap<String, String>,
}

impl EmbeddingTable {
    pub fn load(path: &Path) -> Result<Self, ResourceError> {
        let file = File::open(path).map_err(|source| ResourceError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::read(BufReader::new(file), path)
    }

    pub fn from_text(text: &str) -> Result<Self, ResourceError> {
        Self::read(text.as_bytes(), Path::new("<embeddings>"))
    }

    /// The dimension comes from the first entry; a leading `count dim` header
    /// line in word2vec style is skipped.
    pub fn read<R: BufRead>(reader: R, path: &Path) -> Result<Self, ResourceError> {
        let mut table = EmbeddingTable::default();
        for (idx, line) in reader.lines().enumerate() {
            let line = line.map_err(|source| ResourceError::Io {
                path: path.to_path_buf(),
                source,
            })?;
            let mut parts = line.split_whitespace();
            let Some(word) = parts.next() else { continue };
            let values: Vec<&str> = parts.collect();
            if idx == 0
                && values.len() == 1
                && word.parse::<usize>().is_ok()
                && values[0].parse::<usize>().is_ok()
            {
                continue;
            }
            let vector = values
                .iter()
                .map(|v| v.parse::<f32>())
                .collect::<Result<Vec<f32>, _>>()
                .map_err(|e| ResourceError::Parse {
                    path: path.to_path_buf(),
                    line: idx + 1,
                    message: format!("invalid component for `{word}`: {e}"),
                })?;
            if table.dimension == 0 {
                if vector.is_empty() {
                    return Err(ResourceError::Dimension {
                        path: path.to_path_buf(),
                        line: idx + 1,
                        expected: 1,
                        found: 0,
                    });
                }
                table.dimension = vector.len();
            } else if vector.len() != table.dimension {
                return Err(ResourceError::Dimension {
                    path: path.to_path_buf(),
                    line: idx + 1,
                    expected: table.dimension,
                    found: vector.len(),
                });
            }
            if !table.vectors.contains_key(word) {
                let lower = word.to_lowercase();
                if lower == word || !table.folded.contains_key(&lower) {
                    table.folded.insert(lower, word.to_string());
                }
                table.vectors.insert(word.to_string(), vector);
            }
        }
        Ok(table)
    }

    /// Exact-case entry first, then case-folded.
    pub fn get(&self, word: &str) -> Option<&[f32]> {
        self.vectors
            .get(word)
            .or_else(|| {
                self.folded
                    .get(&word.to_lowercase())
                    .and_then(|k| self.vectors.get(k))
            })
            .map(Vec::as_slice)
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }
}
