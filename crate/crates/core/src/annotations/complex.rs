use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::corpus::{Genre, Instance, TokenSpan};

use super::AnnotationError;

/// One row of a released complexity dataset (`id, corpus, sentence, token, complexity`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReleasedEntry {
    pub id: String,
    pub genre: Genre,
    pub sentence: String,
    pub token: String,
    pub complexity: f64,
    pub is_mwe: bool,
}

impl ReleasedEntry {
    /// Instance view of the entry; the span is located by whitespace token match when possible.
    pub fn to_instance(&self) -> Instance {
        let words: Vec<&str> = self.sentence.split_whitespace().collect();
        let target: Vec<&str> = self.token.split_whitespace().collect();
        let clean = |w: &str| {
            w.trim_matches(|c: char| !c.is_alphanumeric())
                .to_lowercase()
        };
        let start = (0..words.len().saturating_sub(target.len() - 1))
            .find(|&i| {
                target
                    .iter()
                    .enumerate()
                    .all(|(k, t)| words.get(i + k).is_some_and(|w| clean(w) == clean(t)))
            })
            .unwrap_or(0);
        Instance {
            id: self.id.clone(),
            genre: self.genre.clone(),
            sentence: self.sentence.clone(),
            sentence_index: 0,
            span: TokenSpan {
                start,
                end: start + target.len().max(1) - 1,
            },
            surface: target.join(" "),
            is_mwe: self.is_mwe,
            pos: String::new(),
        }
    }
}

/// Reads a headered tab-separated release file. Quoted fields are honored.
pub fn read_released(path: &Path, is_mwe: bool) -> Result<Vec<ReleasedEntry>, AnnotationError> {
    let text = fs::read_to_string(path).map_err(|source| AnnotationError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_released(&text, path, is_mwe)
}

pub fn parse_released(
    text: &str,
    path: &Path,
    is_mwe: bool,
) -> Result<Vec<ReleasedEntry>, AnnotationError> {
    let mut rdr = csv::ReaderBuilder::new()
        .delimiter(b'\t')
        .quoting(false)
        .flexible(true)
        .from_reader(text.as_bytes());
    let bad = |line: u64, message: String| AnnotationError::Parse {
        path: path.to_path_buf(),
        line: line as usize,
        message,
    };
    let headers = rdr.headers().map_err(|e| bad(1, e.to_string()))?.clone();
    let col = |name: &str| {
        headers
            .iter()
            .position(|h| h.trim().eq_ignore_ascii_case(name))
            .ok_or_else(|| bad(1, format!("missing column `{name}`")))
    };
    let (ci, cc, cs, ct, cx) = (
        col("id")?,
        col("corpus")?,
        col("sentence")?,
        col("token")?,
        col("complexity")?,
    );
    let mut out = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| bad(e.position().map_or(0, |p| p.line()), e.to_string()))?;
        let line = rec.position().map_or(0, |p| p.line());
        let get = |i: usize| rec.get(i).map(str::trim).unwrap_or("");
        let complexity: f64 = get(cx)
            .parse()
            .map_err(|_| bad(line, format!("complexity `{}` is not a number", get(cx))))?;
        if !(0.0..=1.0).contains(&complexity) {
            return Err(bad(line, format!("complexity {complexity} outside [0, 1]")));
        }
        let genre: Genre = get(cc).parse().map_err(|e| bad(line, format!("{e}")))?;
        out.push(ReleasedEntry {
            id: get(ci).to_string(),
            genre,
            sentence: get(cs).to_string(),
            token: get(ct).to_string(),
            complexity,
            is_mwe,
        });
    }
    Ok(out)
}

/// Single-word and multi-word release files found in a directory: names
/// containing `single` or `multi`/`mwe`, ending in `.tsv`.
pub fn find_release_files(dir: &Path) -> Result<(Vec<PathBuf>, Vec<PathBuf>), AnnotationError> {
    let entries = fs::read_dir(dir).map_err(|source| AnnotationError::Io {
        path: dir.to_path_buf(),
        source,
    })?;
    let mut single = Vec::new();
    let mut multi = Vec::new();
    for e in entries.flatten() {
        let p = e.path();
        let name = p
            .file_name()
            .and_then(|n| n.to_str())
            .unwrap_or("")
            .to_lowercase();
        if !name.ends_with(".tsv") {
            continue;
        }
        if name.contains("single") {
            single.push(p);
        } else if name.contains("multi") || name.contains("mwe") {
            multi.push(p);
        }
    }
    single.sort();
    multi.sort();
    Ok((single, multi))
}

/// Every single-word and multi-word entry in a release directory.
pub fn read_release_dir(dir: &Path) -> Result<Vec<ReleasedEntry>, AnnotationError> {
    let (single, multi) = find_release_files(dir)?;
    let mut out = Vec::new();
    for p in single {
        out.extend(read_released(&p, false)?);
    }
    for p in multi {
        out.extend(read_released(&p, true)?);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLE: &str = "id\tcorpus\tsentence\ttoken\tcomplexity\n\
        a1\tbible\tBehold, the cubit of a man.\tcubit\t0.5\n\
        a2\tbiomed\t\"Quoted\" gene expression data\tgene expression\t0.25\n\
        a3\tbible\t\"Go, said he to the elder.\telder\t0.1\n";

    #[test]
    fn parses_with_quotes() {
        let rows = parse_released(SAMPLE, Path::new("s.tsv"), false).unwrap();
        assert_eq!(rows.len(), 3);
        assert_eq!(rows[2].sentence, "\"Go, said he to the elder.");
        assert_eq!(rows[0].genre, Genre::Bible);
        assert_eq!(rows[1].complexity, 0.25);
        let inst = rows[0].to_instance();
        assert_eq!(inst.span, TokenSpan::single(2));
        assert_eq!(inst.surface, "cubit");
        let inst = rows[1].to_instance();
        assert_eq!(inst.constituents(), vec!["gene", "expression"]);
    }

    #[test]
    fn rejects_bad_complexity() {
        let text = "id\tcorpus\tsentence\ttoken\tcomplexity\nx\tbible\ts\tt\t1.5\n";
        assert!(parse_released(text, Path::new("s.tsv"), false).is_err());
        let text = "id\tcorpus\tsentence\ttoken\nx\tbible\ts\tt\n";
        assert!(parse_released(text, Path::new("s.tsv"), false).is_err());
    }
}
