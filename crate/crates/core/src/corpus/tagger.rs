use std::collections::HashMap;

use super::{CorpusError, Genre, TaggedSentence};

/// Approximate fallback tagger for untagged text: most-frequent tag per word
/// from a tagged corpus, a small closed-class lexicon, then suffix rules.
#[derive(Debug, Clone, Default)]
pub struct LexiconTagger {
    lexicon: HashMap<String, String>,
}

const CLOSED_CLASS: &[(&str, &str)] = &[
    ("the", "DT"),
    ("a", "DT"),
    ("an", "DT"),
    ("this", "DT"),
    ("that", "DT"),
    ("these", "DT"),
    ("those", "DT"),
    ("of", "IN"),
    ("in", "IN"),
    ("on", "IN"),
    ("at", "IN"),
    ("by", "IN"),
    ("for", "IN"),
    ("with", "IN"),
    ("from", "IN"),
    ("into", "IN"),
    ("to", "TO"),
    ("and", "CC"),
    ("or", "CC"),
    ("but", "CC"),
    ("is", "VBZ"),
    ("are", "VBP"),
    ("was", "VBD"),
    ("were", "VBD"),
    ("be", "VB"),
    ("been", "VBN"),
    ("has", "VBZ"),
    ("have", "VBP"),
    ("had", "VBD"),
    ("will", "MD"),
    ("would", "MD"),
    ("can", "MD"),
    ("could", "MD"),
    ("should", "MD"),
    ("may", "MD"),
    ("not", "RB"),
    ("he", "PRP"),
    ("she", "PRP"),
    ("it", "PRP"),
    ("they", "PRP"),
    ("we", "PRP"),
    ("i", "PRP"),
    ("you", "PRP"),
    ("him", "PRP"),
    ("them", "PRP"),
    ("his", "PRP$"),
    ("her", "PRP$"),
    ("its", "PRP$"),
    ("their", "PRP$"),
    ("our", "PRP$"),
    ("your", "PRP$"),
    ("my", "PRP$"),
    ("which", "WDT"),
    ("who", "WP"),
];

impl LexiconTagger {
    pub fn new() -> Self {
        LexiconTagger {
            lexicon: CLOSED_CLASS
                .iter()
                .map(|(w, t)| (w.to_string(), t.to_string()))
                .collect(),
        }
    }

    /// Learns the most frequent tag of every word seen in `sentences`.
    /// Ties go to the lexicographically smallest tag.
    pub fn train(sentences: &[TaggedSentence]) -> Self {
        let mut counts: HashMap<String, HashMap<&str, usize>> = HashMap::new();
        for s in sentences {
            for t in &s.tokens {
                *counts
                    .entry(t.surface.to_lowercase())
                    .or_default()
                    .entry(t.pos.as_str())
                    .or_insert(0) += 1;
            }
        }
        let mut tagger = Self::new();
        for (word, tags) in counts {
            let best = tags
                .into_iter()
                .max_by(|a, b| a.1.cmp(&b.1).then_with(|| b.0.cmp(a.0)))
                .map(|(t, _)| t.to_string());
            if let Some(best) = best {
                tagger.lexicon.insert(word, best);
            }
        }
        tagger
    }

    pub fn tag_word(&self, word: &str) -> String {
        if let Some(tag) = self.lexicon.get(&word.to_lowercase()) {
            return tag.clone();
        }
        if word.chars().all(|c| c.is_ascii_punctuation()) {
            return ".".into();
        }
        if word.chars().any(|c| c.is_ascii_digit()) {
            return "CD".into();
        }
        let lower = word.to_lowercase();
        let suffix = |s: &str| lower.len() > s.len() + 2 && lower.ends_with(s);
        let tag = if suffix("ly") {
            "RB"
        } else if suffix("ing") {
            "VBG"
        } else if suffix("ed") {
            "VBD"
        } else if ["ous", "ful", "ive", "able", "ible", "al", "ic", "less"]
            .iter()
            .any(|s| suffix(s))
        {
            "JJ"
        } else if word.chars().next().is_some_and(char::is_uppercase) {
            "NNP"
        } else if suffix("s") && !["ss", "us", "is"].iter().any(|s| suffix(s)) {
            "NNS"
        } else {
            "NN"
        };
        tag.into()
    }

    /// Tags whitespace-separated text as one sentence.
    pub fn tag_text(&self, text: &str, genre: Genre) -> Result<TaggedSentence, CorpusError> {
        TaggedSentence::from_pairs(
            genre,
            text.split_whitespace()
                .map(|w| (w.to_string(), self.tag_word(w))),
        )
    }
}
