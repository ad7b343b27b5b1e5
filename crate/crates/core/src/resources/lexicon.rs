use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::categories::{Infobox, Plurality, StressPattern, WordStatus, WordType};
use super::ResourceError;

/// Entries of the frequent-word list that count as "frequent".
pub const FREQUENT_LIST_SIZE: usize = 10_000;

const RATING_RANGE: (u64, u64) = (100, 700);

/// Merged lexical information for one word; `None` means no source lists it.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct LexicalRecord {
    pub word: String,
    pub frequent: bool,
    pub archaic_listed: bool,
    /// Listed anywhere in the frequent-word list, not only its head.
    pub in_frequency_list: bool,
    pub plurality: Option<Plurality>,
    pub familiarity: Option<u16>,
    pub concreteness: Option<u16>,
    pub imageability: Option<u16>,
    pub brown_freq: Option<u64>,
    pub kf_freq: Option<u64>,
    pub tl_freq: Option<u64>,
    pub meanc: Option<u16>,
    pub meanp: Option<u16>,
    pub aoa: Option<u16>,
    pub tq2q: Option<bool>,
    pub tq22: Option<bool>,
    pub wtype: BTreeSet<WordType>,
    pub status: BTreeSet<WordStatus>,
    pub stress: Option<StressPattern>,
    pub infobox: Option<Infobox>,
}

static EMPTY_RECORD: LexicalRecord = LexicalRecord {
    word: String::new(),
    frequent: false,
    archaic_listed: false,
    in_frequency_list: false,
    plurality: None,
    familiarity: None,
    concreteness: None,
    imageability: None,
    brown_freq: None,
    kf_freq: None,
    tl_freq: None,
    meanc: None,
    meanp: None,
    aoa: None,
    tq2q: None,
    tq22: None,
    wtype: BTreeSet::new(),
    status: BTreeSet::new(),
    stress: None,
    infobox: None,
};

/// Which resource-derived field groups hold a value for a word.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Presence {
    pub familiarity: bool,
    pub concreteness: bool,
    pub imageability: bool,
    pub brown_freq: bool,
    pub kf_freq: bool,
    pub tl_freq: bool,
    pub meanc: bool,
    pub meanp: bool,
    pub aoa: bool,
    pub tq2q: bool,
    pub tq22: bool,
    pub wtype: bool,
    pub status: bool,
    pub stress: bool,
    pub frequency_list: bool,
}

impl Presence {
    fn of(r: &LexicalRecord) -> Self {
        Presence {
            familiarity: r.familiarity.is_some(),
            concreteness: r.concreteness.is_some(),
            imageability: r.imageability.is_some(),
            brown_freq: r.brown_freq.is_some(),
            kf_freq: r.kf_freq.is_some(),
            tl_freq: r.tl_freq.is_some(),
            meanc: r.meanc.is_some(),
            meanp: r.meanp.is_some(),
            aoa: r.aoa.is_some(),
            tq2q: r.tq2q.is_some(),
            tq22: r.tq22.is_some(),
            wtype: !r.wtype.is_empty(),
            status: !r.status.is_empty(),
            stress: r.stress.is_some(),
            frequency_list: r.in_frequency_list,
        }
    }

    pub fn any(&self) -> bool {
        *self != Presence::default()
    }
}

#[derive(Debug, Clone, Copy)]
pub struct Lookup<'a> {
    pub record: &'a LexicalRecord,
    pub presence: Presence,
}

/// Files backing a [`Lexicon`].
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct LexiconSources {
    /// Headered TSVs with a `word` column; see `docs/resources.md` for columns.
    #[serde(default)]
    pub tables: Vec<PathBuf>,
    /// One word per line, most frequent first.
    #[serde(default)]
    pub frequent_list: Option<PathBuf>,
    /// One word per line.
    #[serde(default)]
    pub archaic_list: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct LoadReport {
    pub n_words: usize,
    /// Words with a value, per field.
    pub coverage: BTreeMap<String, usize>,
    /// Cells that disagreed with an earlier source (earlier source kept).
    pub conflicts: usize,
    pub ignored_columns: Vec<String>,
}

/// Immutable word-keyed store of [`LexicalRecord`]s.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Lexicon {
    records: HashMap<String, LexicalRecord>,
    folded: HashMap<String, String>,
    report: LoadReport,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Column {
    Word,
    Plurality,
    Familiarity,
    Concreteness,
    Imageability,
    Brown,
    Kf,
    Tl,
    Meanc,
    Meanp,
    Aoa,
    Tq2q,
    Tq22,
    Wtype,
    Status,
    Stress,
    Infobox,
}

impl Column {
    fn from_header(h: &str) -> Option<Column> {
        Some(match h.trim().to_ascii_lowercase().as_str() {
            "word" => Column::Word,
            "plurality" => Column::Plurality,
            "familiarity" | "fam" => Column::Familiarity,
            "concreteness" | "cnc" => Column::Concreteness,
            "imageability" | "imag" | "img" => Column::Imageability,
            "brown_freq" | "brown" => Column::Brown,
            "kf_freq" | "kf" => Column::Kf,
            "tl_freq" | "tl" => Column::Tl,
            "meanc" => Column::Meanc,
            "meanp" => Column::Meanp,
            "aoa" => Column::Aoa,
            "tq2q" => Column::Tq2q,
            "tq22" => Column::Tq22,
            "wtype" => Column::Wtype,
            "status" => Column::Status,
            "stress" => Column::Stress,
            "infobox" => Column::Infobox,
            _ => return None,
        })
    }

    fn name(self) -> &'static str {
        match self {
            Column::Word => "word",
            Column::Plurality => "plurality",
            Column::Familiarity => "familiarity",
            Column::Concreteness => "concreteness",
            Column::Imageability => "imageability",
            Column::Brown => "brown_freq",
            Column::Kf => "kf_freq",
            Column::Tl => "tl_freq",
            Column::Meanc => "meanc",
            Column::Meanp => "meanp",
            Column::Aoa => "aoa",
            Column::Tq2q => "tq2q",
            Column::Tq22 => "tq22",
            Column::Wtype => "wtype",
            Column::Status => "status",
            Column::Stress => "stress",
            Column::Infobox => "infobox",
        }
    }
}

struct CellContext<'a> {
    path: &'a Path,
    line: usize,
    word: &'a str,
    column: Column,
}

impl CellContext<'_> {
    fn parse_err(&self, message: String) -> ResourceError {
        ResourceError::Parse {
            path: self.path.to_path_buf(),
            line: self.line,
            message: format!(
                "word `{}` column {}: {message}",
                self.word,
                self.column.name()
            ),
        }
    }

    fn rating(&self, raw: &str) -> Result<u16, ResourceError> {
        let v = self.count(raw)?;
        if !(RATING_RANGE.0..=RATING_RANGE.1).contains(&v) {
            return Err(ResourceError::OutOfRange {
                path: self.path.to_path_buf(),
                word: self.word.to_string(),
                column: self.column.name().to_string(),
                value: raw.to_string(),
                lo: RATING_RANGE.0,
                hi: RATING_RANGE.1,
            });
        }
        Ok(v as u16)
    }

    fn count(&self, raw: &str) -> Result<u64, ResourceError> {
        match raw.parse::<f64>() {
            Ok(v) if v.is_finite() && v >= 0.0 && v.fract() == 0.0 => Ok(v as u64),
            Ok(_) => Err(ResourceError::OutOfRange {
                path: self.path.to_path_buf(),
                word: self.word.to_string(),
                column: self.column.name().to_string(),
                value: raw.to_string(),
                lo: 0,
                hi: u64::MAX,
            }),
            Err(_) => Err(self.parse_err(format!("`{raw}` is not a number"))),
        }
    }

    fn flag(&self, raw: &str) -> Result<bool, ResourceError> {
        match raw.to_ascii_lowercase().as_str() {
            "1" | "true" | "y" | "yes" => Ok(true),
            "0" | "false" | "n" | "no" => Ok(false),
            _ => Err(self.parse_err(format!("`{raw}` is not a boolean"))),
        }
    }

    fn set<T: std::str::FromStr<Err = String> + Ord>(
        &self,
        raw: &str,
    ) -> Result<BTreeSet<T>, ResourceError> {
        raw.split([',', ';', '|'])
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(|s| s.parse::<T>().map_err(|e| self.parse_err(e)))
            .collect()
    }

    fn one<T: std::str::FromStr<Err = String>>(&self, raw: &str) -> Result<T, ResourceError> {
        raw.parse::<T>().map_err(|e| self.parse_err(e))
    }
}

/// Sets `slot` unless an earlier source already did; returns whether the values conflicted.
fn merge_opt<T: PartialEq>(slot: &mut Option<T>, value: T) -> bool {
    match slot {
        Some(existing) => *existing != value,
        None => {
            *slot = Some(value);
            false
        }
    }
}

impl Lexicon {
    pub fn load(sources: &LexiconSources) -> Result<Self, ResourceError> {
        let mut lex = Lexicon::default();
        for path in &sources.tables {
            let text = read(path)?;
            lex.merge_table(&text, path)?;
        }
        if let Some(path) = &sources.frequent_list {
            let text = read(path)?;
            lex.merge_frequent_list(&text);
        }
        if let Some(path) = &sources.archaic_list {
            let text = read(path)?;
            lex.merge_archaic_list(&text);
        }
        lex.finish();
        Ok(lex)
    }

    /// Builds a store from in-memory table texts, for fixtures and tests.
    pub fn from_tables(
        tables: &[&str],
        frequent: Option<&str>,
        archaic: Option<&str>,
    ) -> Result<Self, ResourceError> {
        let mut lex = Lexicon::default();
        for (i, t) in tables.iter().enumerate() {
            lex.merge_table(t, Path::new(&format!("<table {i}>")))?;
        }
        if let Some(f) = frequent {
            lex.merge_frequent_list(f);
        }
        if let Some(a) = archaic {
            lex.merge_archaic_list(a);
        }
        lex.finish();
        Ok(lex)
    }

    fn merge_table(&mut self, text: &str, path: &Path) -> Result<(), ResourceError> {
        let mut lines = text
            .lines()
            .enumerate()
            .filter(|(_, l)| !l.trim().is_empty());
        let Some((_, header)) = lines.next() else {
            return Ok(());
        };
        let columns: Vec<Option<Column>> = header.split('\t').map(Column::from_header).collect();
        for (h, c) in header.split('\t').zip(&columns) {
            if c.is_none() && !self.report.ignored_columns.iter().any(|x| x == h) {
                self.report.ignored_columns.push(h.to_string());
            }
        }
        let word_col = columns
            .iter()
            .position(|c| *c == Some(Column::Word))
            .ok_or_else(|| ResourceError::Parse {
                path: path.to_path_buf(),
                line: 1,
                message: "header has no `word` column".into(),
            })?;

        for (idx, line) in lines {
            let cells: Vec<&str> = line.split('\t').collect();
            let word = cells.get(word_col).map(|w| w.trim()).unwrap_or("");
            if word.is_empty() {
                return Err(ResourceError::Parse {
                    path: path.to_path_buf(),
                    line: idx + 1,
                    message: "empty word".into(),
                });
            }
            let record = self
                .records
                .entry(word.to_string())
                .or_insert_with(|| LexicalRecord {
                    word: word.to_string(),
                    ..LexicalRecord::default()
                });
            let mut conflicts = 0;
            for (ci, column) in columns.iter().enumerate() {
                let Some(column) = *column else { continue };
                let raw = cells.get(ci).map(|c| c.trim()).unwrap_or("");
                if column == Column::Word || raw.is_empty() {
                    continue;
                }
                let cx = CellContext {
                    path,
                    line: idx + 1,
                    word,
                    column,
                };
                let conflict = match column {
                    Column::Word => false,
                    Column::Plurality => merge_opt(&mut record.plurality, cx.one(raw)?),
                    Column::Familiarity => merge_opt(&mut record.familiarity, cx.rating(raw)?),
                    Column::Concreteness => merge_opt(&mut record.concreteness, cx.rating(raw)?),
                    Column::Imageability => merge_opt(&mut record.imageability, cx.rating(raw)?),
                    Column::Brown => merge_opt(&mut record.brown_freq, cx.count(raw)?),
                    Column::Kf => merge_opt(&mut record.kf_freq, cx.count(raw)?),
                    Column::Tl => merge_opt(&mut record.tl_freq, cx.count(raw)?),
                    Column::Meanc => merge_opt(&mut record.meanc, cx.rating(raw)?),
                    Column::Meanp => merge_opt(&mut record.meanp, cx.rating(raw)?),
                    Column::Aoa => merge_opt(&mut record.aoa, cx.rating(raw)?),
                    Column::Tq2q => merge_opt(&mut record.tq2q, cx.flag(raw)?),
                    Column::Tq22 => merge_opt(&mut record.tq22, cx.flag(raw)?),
                    Column::Wtype => {
                        record.wtype.extend(cx.set::<WordType>(raw)?);
                        false
                    }
                    Column::Status => {
                        record.status.extend(cx.set::<WordStatus>(raw)?);
                        false
                    }
                    Column::Stress => merge_opt(&mut record.stress, cx.one(raw)?),
                    Column::Infobox => merge_opt(&mut record.infobox, cx.one(raw)?),
                };
                conflicts += conflict as usize;
            }
            self.report.conflicts += conflicts;
        }
        Ok(())
    }

    fn list_entry(&mut self, word: &str) -> &mut LexicalRecord {
        self.records
            .entry(word.to_string())
            .or_insert_with(|| LexicalRecord {
                word: word.to_string(),
                ..LexicalRecord::default()
            })
    }

    fn merge_frequent_list(&mut self, text: &str) {
        let words = text.lines().map(str::trim).filter(|l| !l.is_empty());
        for (rank, word) in words.enumerate() {
            let r = self.list_entry(word);
            r.in_frequency_list = true;
            if rank < FREQUENT_LIST_SIZE {
                r.frequent = true;
            }
        }
    }

    fn merge_archaic_list(&mut self, text: &str) {
        for word in text.lines().map(str::trim).filter(|l| !l.is_empty()) {
            self.list_entry(word).archaic_listed = true;
        }
    }

    fn finish(&mut self) {
        let mut keys: Vec<&String> = self.records.keys().collect();
        keys.sort();
        let mut folded: HashMap<String, String> = HashMap::new();
        for key in keys {
            let lower = key.to_lowercase();
            match folded.get(&lower) {
                Some(existing) if *existing == lower => {}
                _ if *key == lower => {
                    folded.insert(lower, key.clone());
                }
                Some(_) => {}
                None => {
                    folded.insert(lower, key.clone());
                }
            }
        }
        self.folded = folded;

        let mut coverage: BTreeMap<String, usize> = BTreeMap::new();
        for r in self.records.values() {
            let p = Presence::of(r);
            let fields = [
                ("frequent", r.frequent),
                ("archaic", r.archaic_listed),
                ("frequency_list", p.frequency_list),
                ("plurality", r.plurality.is_some()),
                ("familiarity", p.familiarity),
                ("concreteness", p.concreteness),
                ("imageability", p.imageability),
                ("brown_freq", p.brown_freq),
                ("kf_freq", p.kf_freq),
                ("tl_freq", p.tl_freq),
                ("meanc", p.meanc),
                ("meanp", p.meanp),
                ("aoa", p.aoa),
                ("tq2q", p.tq2q),
                ("tq22", p.tq22),
                ("wtype", p.wtype),
                ("status", p.status),
                ("stress", p.stress),
                ("infobox", r.infobox.is_some()),
            ];
            for (name, present) in fields {
                *coverage.entry(name.to_string()).or_insert(0) += present as usize;
            }
        }
        self.report.coverage = coverage;
        self.report.n_words = self.records.len();
    }

    /// Exact-case entry first, then a case-folded match.
    pub fn get(&self, word: &str) -> Option<&LexicalRecord> {
        self.records.get(word).or_else(|| {
            self.folded
                .get(&word.to_lowercase())
                .and_then(|k| self.records.get(k))
        })
    }

    /// Record plus presence flags; unknown words get an all-absent record.
    pub fn lookup(&self, word: &str) -> Lookup<'_> {
        let record = self.get(word).unwrap_or(&EMPTY_RECORD);
        Lookup {
            record,
            presence: Presence::of(record),
        }
    }

    pub fn report(&self) -> &LoadReport {
        &self.report
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn records(&self) -> impl Iterator<Item = &LexicalRecord> {
        self.records.values()
    }
}

fn read(path: &Path) -> Result<String, ResourceError> {
    fs::read_to_string(path).map_err(|source| ResourceError::Io {
        path: path.to_path_buf(),
        source,
    })
}
