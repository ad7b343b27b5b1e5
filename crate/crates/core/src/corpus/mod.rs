//! Corpus ingestion and annotation-target sampling.
//!
//! Sentences arrive pre-tagged (token-per-line TSV). Targets are single nouns
//! and two-token noun-noun / adjective-noun expressions, sampled per genre
//! across eight frequency bands with at most five contexts per token.

mod bands;
mod instances;
mod mwe;
mod select;
mod tagged;
mod tagger;

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use bands::{assign_frequency_band, FrequencyBand, FrequencyTable, FREQUENCY_BANDS};
pub use instances::{read_instances, read_instances_str, write_instances, write_instances_string};
pub use mwe::{extract_mwe_candidates, is_adjective_tag, is_noun_tag};
pub use select::{
    select_targets, BandAllocation, BandShortfall, CorpusStats, GenreQuota, Quota, SelectionReport,
    TargetKind, TargetSelection, MAX_INSTANCES_PER_TOKEN,
};
pub use tagged::{parse_tagged, parse_tagged_str};
pub use tagger::LexiconTagger;

#[derive(Debug, thiserror::Error)]
pub enum CorpusError {
    #[error("{path}: line {line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("invalid sentence: {0}")]
    InvalidSentence(String),
    #[error("unknown genre `{0}`")]
    UnknownGenre(String),
}

/// Source genre of a sentence.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub enum Genre {
    Bible,
    Europarl,
    Biomed,
    Other(String),
}

impl Genre {
    pub fn as_str(&self) -> &str {
        match self {
            Genre::Bible => "bible",
            Genre::Europarl => "europarl",
            Genre::Biomed => "biomed",
            Genre::Other(label) => label,
        }
    }
}

impl fmt::Display for Genre {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Genre {
    type Err = CorpusError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let label = s.trim();
        if label.is_empty() {
            return Err(CorpusError::UnknownGenre(s.to_string()));
        }
        Ok(match label.to_lowercase().as_str() {
            "bible" => Genre::Bible,
            "europarl" => Genre::Europarl,
            "biomed" | "biomedical" | "craft" => Genre::Biomed,
            other => Genre::Other(other.to_string()),
        })
    }
}

impl From<Genre> for String {
    fn from(g: Genre) -> String {
        g.as_str().to_string()
    }
}

impl TryFrom<String> for Genre {
    type Error = CorpusError;

    fn try_from(value: String) -> Result<Self, Self::Error> {
        value.parse()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Token {
    pub surface: String,
    pub pos: String,
    /// Byte offset into the sentence's `raw_text`.
    pub char_start: usize,
    pub char_end: usize,
}

/// A POS-tagged sentence whose tokens index into `raw_text`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TaggedSentence {
    pub genre: Genre,
    pub tokens: Vec<Token>,
    pub raw_text: String,
}

impl TaggedSentence {
    /// Builds a sentence by joining surfaces with single spaces.
    pub fn from_pairs<S, P>(
        genre: Genre,
        pairs: impl IntoIterator<Item = (S, P)>,
    ) -> Result<Self, CorpusError>
    where
        S: Into<String>,
        P: Into<String>,
    {
        let mut raw_text = String::new();
        let mut tokens = Vec::new();
        for (surface, pos) in pairs {
            let surface = surface.into();
            let pos = pos.into();
            if !raw_text.is_empty() {
                raw_text.push(' ');
            }
            let char_start = raw_text.len();
            raw_text.push_str(&surface);
            tokens.push(Token {
                char_end: raw_text.len(),
                surface,
                pos,
                char_start,
            });
        }
        let sentence = TaggedSentence {
            genre,
            tokens,
            raw_text,
        };
        sentence.validate()?;
        Ok(sentence)
    }

    pub fn validate(&self) -> Result<(), CorpusError> {
        let mut prev_end = 0;
        for (i, tok) in self.tokens.iter().enumerate() {
            if tok.surface.is_empty() {
                return Err(CorpusError::InvalidSentence(format!(
                    "token {i} has an empty surface"
                )));
            }
            if tok.pos.is_empty() {
                return Err(CorpusError::InvalidSentence(format!(
                    "token {i} has an empty POS tag"
                )));
            }
            if tok.char_start < prev_end
                || tok.char_end <= tok.char_start
                || tok.char_end > self.raw_text.len()
            {
                return Err(CorpusError::InvalidSentence(format!(
                    "token {i} offsets {}..{} overlap or fall outside the text",
                    tok.char_start, tok.char_end
                )));
            }
            if self.raw_text.get(tok.char_start..tok.char_end) != Some(tok.surface.as_str()) {
                return Err(CorpusError::InvalidSentence(format!(
                    "token {i} offsets do not match its surface `{}`",
                    tok.surface
                )));
            }
            prev_end = tok.char_end;
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }
}

/// Inclusive token index range; `start == end` for single words.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct TokenSpan {
    pub start: usize,
    pub end: usize,
}

impl TokenSpan {
    pub fn single(index: usize) -> Self {
        TokenSpan {
            start: index,
            end: index,
        }
    }

    pub fn pair(start: usize) -> Self {
        TokenSpan {
            start,
            end: start + 1,
        }
    }

    pub fn len(&self) -> usize {
        self.end - self.start + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

/// One annotation target in context.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Instance {
    pub id: String,
    pub genre: Genre,
    pub sentence: String,
    /// Index of the source sentence in the list handed to [`select_targets`].
    pub sentence_index: usize,
    pub span: TokenSpan,
    pub surface: String,
    pub is_mwe: bool,
    /// Fine POS tag of the head (last) token.
    pub pos: String,
}

impl Instance {
    /// Surface forms of the target's tokens, in order.
    pub fn constituents(&self) -> Vec<&str> {
        self.surface.split(' ').filter(|s| !s.is_empty()).collect()
    }

    /// Byte offsets of the target inside `sentence`, assuming single-space joining.
    pub fn char_range(&self) -> Option<(usize, usize)> {
        let mut offset = 0;
        let mut start = None;
        for (i, tok) in self.sentence.split(' ').enumerate() {
            if i == self.span.start {
                start = Some(offset);
            }
            if i == self.span.end {
                return start.map(|s| (s, offset + tok.len()));
            }
            offset += tok.len() + 1;
        }
        None
    }
}
