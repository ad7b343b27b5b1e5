use std::fs;
use std::path::{Path, PathBuf};

use crate::corpus::Genre;

use super::{AnnotationError, ReleasedEntry};

fn read(path: &Path) -> Result<String, AnnotationError> {
    fs::read_to_string(path).map_err(|source| AnnotationError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn bad(path: &Path, line: usize, message: String) -> AnnotationError {
    AnnotationError::Parse {
        path: path.to_path_buf(),
        line,
        message,
    }
}

fn entry(id: String, genre: &Genre, sentence: &str, token: &str, complexity: f64) -> ReleasedEntry {
    let token = token.trim();
    ReleasedEntry {
        id,
        genre: genre.clone(),
        sentence: sentence.trim().to_string(),
        token: token.to_string(),
        complexity,
        is_mwe: token.split_whitespace().count() > 1,
    }
}

/// Genre label from a shared-task file name: `WikiNews_Train.tsv` -> `wikinews`.
fn genre_from_name(path: &Path) -> Genre {
    let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("cwi");
    let label = stem.split('_').next().unwrap_or(stem).to_lowercase();
    Genre::Other(if label.is_empty() {
        "cwi".into()
    } else {
        label
    })
}

/// CWI 2018 rows: hit id, sentence, start, end, target, native and non-native
/// annotator counts, their complex votes, binary label, probabilistic label.
/// The probabilistic label is the complexity.
pub fn parse_cwi2018(
    text: &str,
    path: &Path,
    genre: &Genre,
) -> Result<Vec<ReleasedEntry>, AnnotationError> {
    let stem = path
        .file_stem()
        .and_then(|s| s.to_str())
        .unwrap_or("cwi2018");
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let f: Vec<&str> = line.split('\t').collect();
        if f.len() < 11 {
            return Err(bad(
                path,
                i + 1,
                format!("expected 11 fields, found {}", f.len()),
            ));
        }
        let p: f64 = f[10].trim().parse().map_err(|_| {
            bad(
                path,
                i + 1,
                format!("probabilistic label `{}` is not a number", f[10]),
            )
        })?;
        if !(0.0..=1.0).contains(&p) {
            return Err(bad(
                path,
                i + 1,
                format!("probabilistic label {p} outside [0, 1]"),
            ));
        }
        out.push(entry(format!("{stem}:{}", i + 1), genre, f[1], f[4], p));
    }
    Ok(out)
}

/// CWI 2016 rows: sentence, target, index, then either one binary label or
/// one binary column per annotator. The complexity is the share of 1 votes.
pub fn parse_cwi2016(text: &str, path: &Path) -> Result<Vec<ReleasedEntry>, AnnotationError> {
    let stem = path
        .file_stem()
        .and_then(|s| s.to_str())
        .unwrap_or("cwi2016");
    let genre = Genre::Other("cwi2016".into());
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let f: Vec<&str> = line.split('\t').collect();
        if f.len() < 4 {
            return Err(bad(
                path,
                i + 1,
                format!("expected at least 4 fields, found {}", f.len()),
            ));
        }
        let votes = f[3..]
            .iter()
            .map(|v| match v.trim() {
                "0" => Ok(0.0),
                "1" => Ok(1.0),
                other => Err(bad(path, i + 1, format!("label `{other}` is not 0 or 1"))),
            })
            .collect::<Result<Vec<f64>, _>>()?;
        let complexity = votes.iter().sum::<f64>() / votes.len() as f64;
        out.push(entry(
            format!("{stem}:{}", i + 1),
            &genre,
            f[0],
            f[1],
            complexity,
        ));
    }
    Ok(out)
}

fn data_files(path: &Path) -> Result<Vec<PathBuf>, AnnotationError> {
    if !path.is_dir() {
        return Ok(vec![path.to_path_buf()]);
    }
    let entries = fs::read_dir(path).map_err(|source| AnnotationError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let mut files: Vec<PathBuf> = entries
        .flatten()
        .map(|e| e.path())
        .filter(|p| p.is_file() && p.extension().is_some_and(|e| e == "tsv" || e == "txt"))
        .collect();
    files.sort();
    Ok(files)
}

/// Every CWI 2018 row in a file or in the `.tsv`/`.txt` files of a directory.
pub fn read_cwi2018(path: &Path) -> Result<Vec<ReleasedEntry>, AnnotationError> {
    let mut out = Vec::new();
    for f in data_files(path)? {
        out.extend(parse_cwi2018(&read(&f)?, &f, &genre_from_name(&f))?);
    }
    Ok(out)
}

/// Every CWI 2016 row in a file or in the `.tsv`/`.txt` files of a directory.
pub fn read_cwi2016(path: &Path) -> Result<Vec<ReleasedEntry>, AnnotationError> {
    let mut out = Vec::new();
    for f in data_files(path)? {
        out.extend(parse_cwi2016(&read(&f)?, &f)?);
    }
    Ok(out)
}
