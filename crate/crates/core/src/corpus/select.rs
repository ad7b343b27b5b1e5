use std::collections::{BTreeMap, HashMap, HashSet};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::bands::{assign_frequency_band, FrequencyTable, FREQUENCY_BANDS};
use super::mwe::{extract_mwe_candidates, is_noun_tag};
use super::{Genre, Instance, TaggedSentence, TokenSpan};

/// Upper bound on contexts selected for one token within one genre.
pub const MAX_INSTANCES_PER_TOKEN: usize = 5;

/// Below this ratio of distinct tokens to contexts-per-token the diversity check warns.
const DIVERSITY_RATIO: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Quota {
    pub singles: usize,
    pub mwes: usize,
}

pub type GenreQuota = BTreeMap<Genre, Quota>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TargetKind {
    Single,
    Mwe,
}

impl TargetKind {
    fn label(self) -> &'static str {
        match self {
            TargetKind::Single => "single",
            TargetKind::Mwe => "mwe",
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct CorpusStats {
    pub n_instances: usize,
    pub n_distinct_tokens: usize,
    pub mean_contexts_per_token: f64,
}

impl CorpusStats {
    pub fn from_instances<'a>(instances: impl IntoIterator<Item = &'a Instance>) -> Self {
        let mut n = 0;
        let mut distinct = HashSet::new();
        for inst in instances {
            n += 1;
            distinct.insert(inst.surface.to_lowercase());
        }
        let r = distinct.len();
        CorpusStats {
            n_instances: n,
            n_distinct_tokens: r,
            mean_contexts_per_token: if r == 0 { 0.0 } else { n as f64 / r as f64 },
        }
    }

    /// Whether distinct tokens (R) comfortably outnumber contexts per token (P).
    pub fn is_diverse(&self) -> bool {
        self.n_distinct_tokens as f64 >= DIVERSITY_RATIO * self.mean_contexts_per_token
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BandAllocation {
    pub genre: Genre,
    pub kind: TargetKind,
    pub band: usize,
    /// Selectable contexts after the per-token cap.
    pub capacity: usize,
    pub allocated: usize,
}

/// A band (or a whole genre/kind when `band` is `None`) that could not supply its share.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BandShortfall {
    pub genre: Genre,
    pub kind: TargetKind,
    pub band: Option<usize>,
    pub requested: usize,
    pub available: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SelectionReport {
    pub allocations: Vec<BandAllocation>,
    pub shortfalls: Vec<BandShortfall>,
    pub per_genre: BTreeMap<String, CorpusStats>,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TargetSelection {
    pub instances: Vec<Instance>,
    pub stats: CorpusStats,
    pub report: SelectionReport,
}

#[derive(Debug, Clone)]
struct Candidate {
    sentence_index: usize,
    span: TokenSpan,
    key: String,
    surface: String,
    pos: String,
}

/// Samples single-noun and two-token targets per genre across the frequency bands.
///
/// Per-band targets are proportional to each band's capacity (selectable
/// contexts after the five-per-token cap); rounding remainders go to the
/// largest bands. Bands whose capacity is below an even eighth of the quota
/// and genres that cannot meet their quota are reported as shortfalls.
pub fn select_targets(
    sentences: &[TaggedSentence],
    freq_table: &FrequencyTable,
    quota: &GenreQuota,
    seed: u64,
) -> TargetSelection {
    let mut report = SelectionReport::default();
    let mut instances = Vec::new();

    for (genre, q) in quota {
        let mut genre_instances = Vec::new();
        for (kind, wanted) in [(TargetKind::Single, q.singles), (TargetKind::Mwe, q.mwes)] {
            let candidates = collect_candidates(sentences, genre, kind, freq_table);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(stream_id(&format!("{genre}/{}", kind.label())));
            let chosen = sample_kind(
                genre,
                kind,
                wanted,
                candidates,
                sentences,
                &mut rng,
                &mut report,
            );
            let mut chosen: Vec<Candidate> = chosen;
            chosen.sort_by_key(|c| (c.sentence_index, c.span));
            for (n, c) in chosen.into_iter().enumerate() {
                genre_instances.push(Instance {
                    id: format!("{genre}_{}_{:05}", kind.label(), n + 1),
                    genre: genre.clone(),
                    sentence: sentences[c.sentence_index].raw_text.clone(),
                    sentence_index: c.sentence_index,
                    span: c.span,
                    surface: c.surface,
                    is_mwe: kind == TargetKind::Mwe,
                    pos: c.pos,
                });
            }
        }
        report.per_genre.insert(
            genre.to_string(),
            CorpusStats::from_instances(&genre_instances),
        );
        instances.extend(genre_instances);
    }

    let stats = CorpusStats::from_instances(&instances);
    if !stats.is_diverse() && stats.n_instances > 0 {
        let msg = format!(
            "low token diversity: {} distinct tokens vs {:.2} contexts per token",
            stats.n_distinct_tokens, stats.mean_contexts_per_token
        );
        log::warn!("{msg}");
        report.warnings.push(msg);
    }
    TargetSelection {
        instances,
        stats,
        report,
    }
}

fn collect_candidates(
    sentences: &[TaggedSentence],
    genre: &Genre,
    kind: TargetKind,
    freq_table: &FrequencyTable,
) -> [Vec<Candidate>; 8] {
    let mut by_band: [Vec<Candidate>; 8] = Default::default();
    for (si, s) in sentences
        .iter()
        .enumerate()
        .filter(|(_, s)| &s.genre == genre)
    {
        let spans: Vec<TokenSpan> = match kind {
            TargetKind::Single => (0..s.tokens.len())
                .filter(|&i| is_noun_tag(&s.tokens[i].pos))
                .map(TokenSpan::single)
                .collect(),
            TargetKind::Mwe => extract_mwe_candidates(s),
        };
        for span in spans {
            let words: Vec<&str> = s.tokens[span.start..=span.end]
                .iter()
                .map(|t| t.surface.as_str())
                .collect();
            let Some(freq) = freq_table.get_phrase(&words) else {
                continue;
            };
            let Some(band) = assign_frequency_band(freq) else {
                continue;
            };
            let surface = words.join(" ");
            by_band[band.index].push(Candidate {
                sentence_index: si,
                span,
                key: surface.to_lowercase(),
                surface,
                pos: s.tokens[span.end].pos.clone(),
            });
        }
    }
    by_band
}

/// Contexts a band can contribute: per token, distinct sentence texts capped at five.
fn band_capacity(candidates: &[Candidate], sentences: &[TaggedSentence]) -> usize {
    let mut contexts: HashMap<&str, HashSet<&str>> = HashMap::new();
    for c in candidates {
        contexts
            .entry(c.key.as_str())
            .or_default()
            .insert(sentences[c.sentence_index].raw_text.as_str());
    }
    contexts
        .values()
        .map(|s| s.len().min(MAX_INSTANCES_PER_TOKEN))
        .sum()
}

fn allocate(wanted: usize, capacities: &[usize; 8]) -> [usize; 8] {
    let total: usize = capacities.iter().sum();
    let mut alloc = [0usize; 8];
    if total == 0 {
        return alloc;
    }
    let target = wanted.min(total);
    for b in 0..8 {
        alloc[b] = ((target as u128 * capacities[b] as u128) / total as u128) as usize;
    }
    let mut remaining = target - alloc.iter().sum::<usize>();
    let mut order: Vec<usize> = (0..8).collect();
    order.sort_by(|&a, &b| capacities[b].cmp(&capacities[a]).then(a.cmp(&b)));
    while remaining > 0 {
        let mut progressed = false;
        for &b in &order {
            if remaining == 0 {
                break;
            }
            if alloc[b] < capacities[b] {
                alloc[b] += 1;
                remaining -= 1;
                progressed = true;
            }
        }
        if !progressed {
            break;
        }
    }
    alloc
}

fn sample_kind(
    genre: &Genre,
    kind: TargetKind,
    wanted: usize,
    by_band: [Vec<Candidate>; 8],
    sentences: &[TaggedSentence],
    rng: &mut ChaCha8Rng,
    report: &mut SelectionReport,
) -> Vec<Candidate> {
    let mut capacities = [0usize; 8];
    for b in 0..8 {
        capacities[b] = band_capacity(&by_band[b], sentences);
    }
    let alloc = allocate(wanted, &capacities);
    let fair_share = wanted.div_ceil(FREQUENCY_BANDS.len());
    let total_capacity: usize = capacities.iter().sum();

    if total_capacity < wanted {
        let msg = format!(
            "{genre} {}: requested {wanted} targets but only {total_capacity} are available",
            kind.label()
        );
        log::warn!("{msg}");
        report.warnings.push(msg);
        report.shortfalls.push(BandShortfall {
            genre: genre.clone(),
            kind,
            band: None,
            requested: wanted,
            available: total_capacity,
        });
    }

    let mut chosen = Vec::new();
    for (b, mut pool) in by_band.into_iter().enumerate() {
        report.allocations.push(BandAllocation {
            genre: genre.clone(),
            kind,
            band: b,
            capacity: capacities[b],
            allocated: alloc[b],
        });
        if wanted > 0 && capacities[b] < fair_share {
            report.shortfalls.push(BandShortfall {
                genre: genre.clone(),
                kind,
                band: Some(b),
                requested: fair_share,
                available: capacities[b],
            });
        }
        // Pool is already in canonical (sentence, token) order.
        pool.shuffle(rng);
        let mut per_token: HashMap<String, usize> = HashMap::new();
        let mut seen_context: HashSet<(String, usize)> = HashSet::new();
        let mut used_text: HashSet<(String, &str)> = HashSet::new();
        let mut taken = 0;
        for c in pool {
            if taken == alloc[b] {
                break;
            }
            let count = per_token.get(&c.key).copied().unwrap_or(0);
            if count >= MAX_INSTANCES_PER_TOKEN {
                continue;
            }
            let text = sentences[c.sentence_index].raw_text.as_str();
            if !used_text.insert((c.key.clone(), text))
                || !seen_context.insert((c.key.clone(), c.sentence_index))
            {
                continue;
            }
            per_token.insert(c.key.clone(), count + 1);
            taken += 1;
            chosen.push(c);
        }
    }
    chosen
}

/// FNV-1a, used to derive stable per-genre RNG streams.
fn stream_id(label: &str) -> u64 {
    label.bytes().fold(0xcbf2_9ce4_8422_2325u64, |h, b| {
        (h ^ b as u64).wrapping_mul(0x0000_0100_0000_01b3)
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sentences(genre: Genre, texts: &[&[(&str, &str)]]) -> Vec<TaggedSentence> {
        texts
            .iter()
            .map(|pairs| TaggedSentence::from_pairs(genre.clone(), pairs.iter().copied()).unwrap())
            .collect()
    }

    #[test]
    fn allocation_is_proportional_with_remainder_to_largest() {
        let alloc = allocate(10, &[0, 0, 10, 5, 5, 0, 0, 0]);
        assert_eq!(alloc, [0, 0, 6, 2, 2, 0, 0, 0]);
        assert_eq!(
            allocate(100, &[1, 2, 0, 0, 0, 0, 0, 0]),
            [1, 2, 0, 0, 0, 0, 0, 0]
        );
    }

    #[test]
    fn at_most_five_contexts_per_token() {
        let texts: Vec<Vec<(String, &str)>> = (0..6)
            .map(|i| vec![(format!("clause{i}"), "DT"), ("law".to_string(), "NN")])
            .collect();
        let sents: Vec<TaggedSentence> = texts
            .into_iter()
            .map(|p| TaggedSentence::from_pairs(Genre::Europarl, p).unwrap())
            .collect();
        let freq: FrequencyTable = [("law".to_string(), 300u64)].into_iter().collect();
        let quota = GenreQuota::from([(
            Genre::Europarl,
            Quota {
                singles: 6,
                mwes: 0,
            },
        )]);
        let sel = select_targets(&sents, &freq, &quota, 7);
        assert_eq!(sel.instances.len(), 5);
        assert_eq!(sel.report.shortfalls[0].band, None);
        assert_eq!(sel.report.shortfalls[0].available, 5);
    }

    #[test]
    fn duplicate_contexts_count_once() {
        let s = sentences(
            Genre::Bible,
            &[
                &[("the", "DT"), ("law", "NN")],
                &[("the", "DT"), ("law", "NN")],
            ],
        );
        let freq: FrequencyTable = [("law".to_string(), 300u64)].into_iter().collect();
        let quota = GenreQuota::from([(
            Genre::Bible,
            Quota {
                singles: 2,
                mwes: 0,
            },
        )]);
        let sel = select_targets(&s, &freq, &quota, 1);
        assert_eq!(sel.instances.len(), 1);
    }

    #[test]
    fn selects_nouns_and_mwes_within_bands() {
        let s = sentences(
            Genre::Biomed,
            &[
                &[
                    ("storage", "NN"),
                    ("box", "NN"),
                    ("is", "VBZ"),
                    ("red", "JJ"),
                ],
                &[
                    ("ready", "JJ"),
                    ("meal", "NNS"),
                    ("the", "DT"),
                    ("cell", "NN"),
                ],
                &[("rare", "JJ"), ("zyx", "NN")],
            ],
        );
        let freq: FrequencyTable = [
            ("storage", 40u64),
            ("box", 900),
            ("ready", 3000),
            ("meal", 60),
            ("cell", 20000),
            ("zyx", 1),
            ("rare", 500),
        ]
        .into_iter()
        .map(|(w, c)| (w.to_string(), c))
        .collect();
        let quota = GenreQuota::from([(
            Genre::Biomed,
            Quota {
                singles: 10,
                mwes: 10,
            },
        )]);
        let sel = select_targets(&s, &freq, &quota, 3);
        let singles: Vec<&str> = sel
            .instances
            .iter()
            .filter(|i| !i.is_mwe)
            .map(|i| i.surface.as_str())
            .collect();
        let mwes: Vec<&str> = sel
            .instances
            .iter()
            .filter(|i| i.is_mwe)
            .map(|i| i.surface.as_str())
            .collect();
        // cell is above 10,000 and zyx is a hapax.
        assert_eq!(singles, vec!["storage", "box", "meal"]);
        assert_eq!(mwes, vec!["storage box", "ready meal"]);
        assert_eq!(sel.stats.n_instances, 5);
        assert_eq!(sel.instances[0].id, "biomed_single_00001");
    }

    #[test]
    fn deterministic_for_seed() {
        let texts: Vec<Vec<(String, &str)>> = (0..50)
            .map(|i| {
                vec![
                    (format!("w{}", i % 13), "NN"),
                    ("of".to_string(), "IN"),
                    (format!("v{}", i % 7), "NNS"),
                ]
            })
            .collect();
        let sents: Vec<TaggedSentence> = texts
            .into_iter()
            .map(|p| TaggedSentence::from_pairs(Genre::Bible, p).unwrap())
            .collect();
        let freq: FrequencyTable = (0..13)
            .map(|i| (format!("w{i}"), 3 + i * 200))
            .chain((0..7).map(|i| (format!("v{i}"), 20 + i * 7)))
            .collect();
        let quota = GenreQuota::from([(
            Genre::Bible,
            Quota {
                singles: 30,
                mwes: 0,
            },
        )]);
        let a = select_targets(&sents, &freq, &quota, 11);
        let b = select_targets(&sents, &freq, &quota, 11);
        assert_eq!(a, b);
        assert_eq!(a.instances.len(), 30);
    }
}
