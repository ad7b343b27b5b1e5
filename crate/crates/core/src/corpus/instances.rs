use std::collections::HashMap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use super::{CorpusError, Genre, Instance, TokenSpan};

const HEADER: &str = "id\tgenre\tsentence\tstart_token\tend_token\tsurface\tis_mwe";

pub fn write_instances_string(instances: &[Instance]) -> String {
    let mut out = String::with_capacity(instances.len() * 96);
    out.push_str(HEADER);
    out.push('\n');
    for i in instances {
        let _ = writeln!(
            out,
            "{}\t{}\t{}\t{}\t{}\t{}\t{}",
            i.id, i.genre, i.sentence, i.span.start, i.span.end, i.surface, i.is_mwe
        );
    }
    out
}

pub fn write_instances(path: &Path, instances: &[Instance]) -> Result<(), CorpusError> {
    fs::write(path, write_instances_string(instances)).map_err(|source| CorpusError::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn read_instances(path: &Path) -> Result<Vec<Instance>, CorpusError> {
    let text = fs::read_to_string(path).map_err(|source| CorpusError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse(&text, path)
}

pub fn read_instances_str(text: &str) -> Result<Vec<Instance>, CorpusError> {
    parse(text, Path::new("<input>"))
}

fn parse(text: &str, path: &Path) -> Result<Vec<Instance>, CorpusError> {
    let err = |line: usize, message: String| CorpusError::Parse {
        path: path.to_path_buf(),
        line,
        message,
    };
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h.trim_end() == HEADER => {}
        Some((_, h)) => return Err(err(1, format!("unexpected header `{h}`"))),
        None => return Ok(Vec::new()),
    }
    let mut sentence_ids: HashMap<String, usize> = HashMap::new();
    let mut out = Vec::new();
    for (idx, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let cols: Vec<&str> = line.split('\t').collect();
        if cols.len() != 7 {
            return Err(err(
                idx + 1,
                format!("expected 7 columns, found {}", cols.len()),
            ));
        }
        let parse_usize = |s: &str| {
            s.parse::<usize>()
                .map_err(|_| err(idx + 1, format!("invalid token index `{s}`")))
        };
        let span = TokenSpan {
            start: parse_usize(cols[3])?,
            end: parse_usize(cols[4])?,
        };
        if span.end < span.start || span.len() > 2 {
            return Err(err(idx + 1, "span must cover one or two tokens".into()));
        }
        let is_mwe = cols[6]
            .parse::<bool>()
            .map_err(|_| err(idx + 1, format!("invalid is_mwe `{}`", cols[6])))?;
        if is_mwe != (span.len() == 2) {
            return Err(err(idx + 1, "is_mwe disagrees with span length".into()));
        }
        let next = sentence_ids.len();
        let sentence_index = *sentence_ids.entry(cols[2].to_string()).or_insert(next);
        out.push(Instance {
            id: cols[0].to_string(),
            genre: cols[1].parse::<Genre>()?,
            sentence: cols[2].to_string(),
            sentence_index,
            span,
            surface: cols[5].to_string(),
            is_mwe,
            pos: String::new(),
        });
    }
    Ok(out)
}
