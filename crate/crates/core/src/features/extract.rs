use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::Instance;
use crate::resources::{EmbeddingTable, Lexicon, Lookup};

use super::layout::{FeatureLayout, GroupId, PresenceFlag};
use super::matrix::FeatureMatrix;
use super::FeatureError;

/// Divisor for word length; the longest English dictionary word has 45 letters.
pub const MAX_WORD_LENGTH: f64 = 50.0;

/// Character count over 50, clamped to 1.
pub fn normalized_length(word: &str) -> Result<f64, FeatureError> {
    let n = word.chars().count();
    if n == 0 {
        return Err(FeatureError::EmptyWord);
    }
    Ok((n as f64 / MAX_WORD_LENGTH).min(1.0))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector {
    pub layout_version: String,
    pub values: Vec<f64>,
}

impl FeatureVector {
    pub fn group<'a>(&'a self, layout: &FeatureLayout, group: GroupId) -> &'a [f64] {
        &self.values[layout.range(group)]
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Maps words to feature vectors against read-only resource stores.
#[derive(Debug, Clone)]
pub struct Featurizer<'a> {
    lexicon: &'a Lexicon,
    embeddings: Option<&'a EmbeddingTable>,
    layout: FeatureLayout,
}

impl<'a> Featurizer<'a> {
    /// The embedding block takes the table's dimension, or the standard 300 without a table.
    pub fn new(lexicon: &'a Lexicon, embeddings: Option<&'a EmbeddingTable>) -> Self {
        let layout = match embeddings {
            Some(e) if e.dimension() > 0 => FeatureLayout::new(e.dimension()),
            _ => FeatureLayout::default(),
        };
        Featurizer {
            lexicon,
            embeddings,
            layout,
        }
    }

    pub fn layout(&self) -> &FeatureLayout {
        &self.layout
    }

    pub fn featurize_word(&self, word: &str) -> Result<FeatureVector, FeatureError> {
        let l = &self.layout;
        let mut v = vec![0.0; l.len()];
        let Lookup {
            record: r,
            presence: p,
        } = self.lexicon.lookup(word);
        let flag = |b: bool| if b { 1.0 } else { 0.0 };
        let opt = |x: Option<u16>| x.map_or(0.0, f64::from);
        let count = |x: Option<u64>| x.map_or(0.0, |c| c as f64);

        v[l.range(GroupId::A).start] = flag(r.frequent);
        v[l.range(GroupId::B).start] = flag(r.archaic_listed);
        v[l.range(GroupId::C).start] = normalized_length(word)?;
        if let Some(pl) = r.plurality {
            v[l.range(GroupId::D).start + pl.index()] = 1.0;
        }
        let scalars = [
            (GroupId::E, opt(r.familiarity), p.familiarity),
            (GroupId::F, opt(r.concreteness), p.concreteness),
            (GroupId::G, opt(r.imageability), p.imageability),
            (GroupId::H, count(r.brown_freq), p.brown_freq),
            (GroupId::I, count(r.kf_freq), p.kf_freq),
            (GroupId::J, count(r.tl_freq), p.tl_freq),
            (GroupId::K, opt(r.meanc), p.meanc),
            (GroupId::L, opt(r.meanp), p.meanp),
            (GroupId::M, opt(r.aoa), p.aoa),
            (GroupId::N, r.tq2q.map_or(0.0, flag), p.tq2q),
            (GroupId::O, r.tq22.map_or(0.0, flag), p.tq22),
        ];
        for (g, value, present) in scalars {
            v[l.range(g).start] = value;
            v[l.presence_column(PresenceFlag::Group(g))] = flag(present);
        }
        for t in &r.wtype {
            v[l.range(GroupId::P).start + t.index()] = 1.0;
        }
        for s in &r.status {
            v[l.range(GroupId::Q).start + s.index()] = 1.0;
        }
        if let Some(st) = r.stress {
            v[l.range(GroupId::R).start + st.index()] = 1.0;
        }
        if let Some(ib) = r.infobox {
            v[l.range(GroupId::S).start + ib.index()] = 1.0;
        }
        v[l.presence_column(PresenceFlag::Group(GroupId::P))] = flag(p.wtype);
        v[l.presence_column(PresenceFlag::Group(GroupId::Q))] = flag(p.status);
        v[l.presence_column(PresenceFlag::Group(GroupId::R))] = flag(p.stress);
        v[l.presence_column(PresenceFlag::FrequencyList)] = flag(p.frequency_list);

        if let Some(vec) = self.embeddings.and_then(|e| e.get(word)) {
            let t = l.range(GroupId::T);
            for (dst, src) in v[t].iter_mut().zip(vec) {
                *dst = f64::from(*src);
            }
            v[l.presence_column(PresenceFlag::Embedding)] = 1.0;
        }

        Ok(FeatureVector {
            layout_version: l.layout_version.clone(),
            values: v,
        })
    }

    /// Two-word target: numeric columns averaged, symbolic columns from the second word.
    pub fn featurize_mwe(&self, first: &str, second: &str) -> Result<FeatureVector, FeatureError> {
        let a = self.featurize_word(first)?;
        let mut b = self.featurize_word(second)?;
        for (c, (x, y)) in a.values.iter().zip(b.values.iter_mut()).enumerate() {
            if self.layout.is_numeric_column(c) {
                *y = (x + *y) / 2.0;
            }
        }
        Ok(b)
    }

    pub fn featurize(&self, target: &Instance) -> Result<FeatureVector, FeatureError> {
        let parts = target.constituents();
        let bad = |message: String| FeatureError::BadInstance {
            id: target.id.clone(),
            message,
        };
        match (target.is_mwe, parts.as_slice()) {
            (false, [w]) => self.featurize_word(w),
            (true, [a, b]) => self.featurize_mwe(a, b),
            (false, _) => Err(bad(format!(
                "single-word target has {} tokens",
                parts.len()
            ))),
            (true, _) => Err(bad(format!(
                "multi-word target has {} tokens, expected 2",
                parts.len()
            ))),
        }
    }

    pub fn featurize_all(&self, targets: &[Instance]) -> Result<FeatureMatrix, FeatureError> {
        let rows = targets
            .par_iter()
            .map(|t| self.featurize(t).map(|v| v.values))
            .collect::<Result<Vec<_>, _>>()?;
        let ids = targets.iter().map(|t| t.id.clone()).collect();
        Ok(FeatureMatrix::from_rows(self.layout.clone(), ids, rows))
    }
}
