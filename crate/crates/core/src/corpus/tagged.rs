use std::fs;
use std::path::{Path, PathBuf};

use super::{CorpusError, Genre, TaggedSentence};

/// Reads a token-per-line `surface\tPOS` file with blank lines between sentences.
pub fn parse_tagged(path: &Path, genre: Genre) -> Result<Vec<TaggedSentence>, CorpusError> {
    let text = fs::read_to_string(path).map_err(|source| CorpusError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_tagged_impl(&text, genre, path)
}

pub fn parse_tagged_str(text: &str, genre: Genre) -> Result<Vec<TaggedSentence>, CorpusError> {
    parse_tagged_impl(text, genre, Path::new("<input>"))
}

fn parse_tagged_impl(
    text: &str,
    genre: Genre,
    path: &Path,
) -> Result<Vec<TaggedSentence>, CorpusError> {
    let mut sentences = Vec::new();
    let mut pending: Vec<(String, String)> = Vec::new();

    let flush = |pending: &mut Vec<(String, String)>, sentences: &mut Vec<TaggedSentence>| {
        if !pending.is_empty() {
            let pairs = std::mem::take(pending);
            // Columns are validated per line, so construction cannot fail here.
            let sentence =
                TaggedSentence::from_pairs(genre.clone(), pairs).expect("validated tokens");
            sentences.push(sentence);
        }
    };

    for (idx, line) in text.lines().enumerate() {
        let line = line.trim_end_matches('\r');
        if line.trim().is_empty() {
            flush(&mut pending, &mut sentences);
            continue;
        }
        let cols: Vec<&str> = line.split('\t').collect();
        if cols.len() != 2 {
            return Err(parse_error(
                path,
                idx + 1,
                format!("expected 2 tab-separated columns, found {}", cols.len()),
            ));
        }
        let surface = cols[0].trim();
        let pos = cols[1].trim();
        if surface.is_empty() || pos.is_empty() || surface.contains(' ') {
            return Err(parse_error(
                path,
                idx + 1,
                "empty surface or POS, or surface contains a space".into(),
            ));
        }
        pending.push((surface.to_string(), pos.to_string()));
    }
    flush(&mut pending, &mut sentences);
    Ok(sentences)
}

fn parse_error(path: &Path, line: usize, message: String) -> CorpusError {
    CorpusError::Parse {
        path: PathBuf::from(path),
        line,
        message,
    }
}
