//! Acceptance report: one PASS/FAIL/SKIP line per criterion, followed by the
//! individual checks. Dataset-backed checks read their inputs from the
//! environment and are skipped when unset:
//!
//! - `LCP_COMPLEX_DIR`: released CompLex 2.0 TSVs (single and multi files).
//! - `LCP_COMPLEX_ANNOTATIONS`: raw judgments as JSONL, for the subjectivity check.
//! - `LCP_RESOURCES_DIR`: lexicon `*.tsv` tables, `frequent.txt`, `archaic.txt`, `embeddings.txt`.
//! - `LCP_CWI2018`, `LCP_CWI2016`: shared-task files or directories.
//!
//! Relative paths resolve against the workspace root. `LCP_REQUIRE_DATASETS=1`
//! turns every skip into a failure.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;
use std::time::{Duration, Instant};

use lcp_core::annotations::{
    aggregate, filter_annotators, label_from_scores, map_likert, read_cwi2016, read_cwi2018,
    read_jsonl, read_release_dir, shapiro_wilk, subjectivity_correlation, AnnotationRecord,
    QcConfig, RejectReason, ReleasedEntry, LIKERT_SCALE,
};
use lcp_core::corpus::{
    assign_frequency_band, extract_mwe_candidates, is_noun_tag, select_targets, FrequencyTable,
    Genre, GenreQuota, Instance, Quota, TaggedSentence, TargetKind, TokenSpan, FREQUENCY_BANDS,
    MAX_INSTANCES_PER_TOKEN,
};
use lcp_core::eval::{
    ablate, average_ranks, cell_seed, classification_report, complement, cross_genre_table, kfold,
    pearson, repeated_holdout, spearman, AblationSet, Dataset, EvalError, ForestTrainer,
    RegressionTrainer, Trainer,
};
use lcp_core::features::{normalized_length, FeatureLayout, Featurizer};
use lcp_core::models::{train_forest, train_regression, ComplexityBin, ForestParams};
use lcp_core::resources::{EmbeddingTable, Lexicon, LexiconSources};
use lcp_service::{
    read_journal, AnnotationService, Clock, ManualClock, Registration, ReviewRequest,
    ServiceConfig, ServiceError, Submission,
};
use ndarray::{Array1, Array2, Axis};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const HEAVEN_MEAN: f64 = 0.0625;
const HEAVEN_TOL: f64 = 1e-9;
const SHAPIRO_TOL: f64 = 0.02;
const SHAPIRO_BUDGET: Duration = Duration::from_secs(1);
const GENRE_MEAN_TOL: f64 = 0.005;
const SUBJECTIVITY_R: f64 = 0.621;
const SUBJECTIVITY_TOL: f64 = 0.05;
const RECOVERY_TOL: f64 = 1e-8;
const ORTHOGONALITY_TOL: f64 = 1e-6;
const RIDGE_LAMBDAS: [f64; 4] = [0.0, 1e-4, 1e-2, 1.0];
const DEFAULT_RIDGE_LAMBDA: f64 = 1.0;
const SINGLE_PEARSON: f64 = 0.771;
const SINGLE_PEARSON_TOL: f64 = 0.05;
const TRANSFER_TOL: f64 = 0.07;
const FALLBACK_MIN_PEARSON: f64 = 0.5;
const FOREST_TARGET_TOL: f64 = 0.05;
const RHO_LENGTH: f64 = 0.4208;
const RHO_BROWN: f64 = -0.3640;
const RHO_TOL: f64 = 0.05;
const SPEARMAN_ORACLE_TOL: f64 = 1e-12;
const PEARSON_HAND_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Status {
    Pass,
    Fail,
    Skip,
}

impl Status {
    fn tag(self) -> &'static str {
        match self {
            Status::Pass => "PASS",
            Status::Fail => "FAIL",
            Status::Skip => "SKIP",
        }
    }
}

struct Check {
    name: String,
    status: Status,
    detail: String,
}

#[derive(Default)]
struct Checks(Vec<Check>);

impl Checks {
    fn check(&mut self, name: &str, ok: bool, detail: impl Into<String>) {
        self.0.push(Check {
            name: name.into(),
            status: if ok { Status::Pass } else { Status::Fail },
            detail: detail.into(),
        });
    }

    fn skip(&mut self, name: &str, reason: impl Into<String>) {
        self.0.push(Check {
            name: name.into(),
            status: Status::Skip,
            detail: reason.into(),
        });
    }

    fn error(&mut self, name: &str, err: impl std::fmt::Display) {
        self.check(name, false, format!("error: {err}"));
    }
}

fn near(got: f64, want: f64, tol: f64) -> bool {
    (got - want).abs() <= tol
}

fn env_path(var: &str) -> Option<PathBuf> {
    let path = PathBuf::from(std::env::var_os(var).filter(|v| !v.is_empty())?);
    Some(if path.is_relative() {
        Path::new(env!("CARGO_MANIFEST_DIR"))
            .join("../..")
            .join(path)
    } else {
        path
    })
}

fn unset(var: &str) -> String {
    format!("{var} not set")
}

// ---------------------------------------------------------------------------
// Installed data and resources.

struct Installed {
    lexicon: Lexicon,
    embeddings: Option<EmbeddingTable>,
    full: bool,
    note: String,
}

impl Installed {
    fn featurizer(&self) -> Featurizer<'_> {
        Featurizer::new(&self.lexicon, self.embeddings.as_ref())
    }
}

fn installed_resources() -> Result<Installed, String> {
    let Some(dir) = env_path("LCP_RESOURCES_DIR") else {
        return Ok(Installed {
            lexicon: Lexicon::from_tables(&[], None, None).map_err(|e| e.to_string())?,
            embeddings: None,
            full: false,
            note: "no resources installed (length only)".into(),
        });
    };
    let mut tables: Vec<PathBuf> = std::fs::read_dir(&dir)
        .map_err(|e| format!("{}: {e}", dir.display()))?
        .flatten()
        .map(|e| e.path())
        .filter(|p| p.extension().is_some_and(|e| e == "tsv"))
        .collect();
    tables.sort();
    let opt = |name: &str| Some(dir.join(name)).filter(|p| p.exists());
    let lexicon = Lexicon::load(&LexiconSources {
        tables: tables.clone(),
        frequent_list: opt("frequent.txt"),
        archaic_list: opt("archaic.txt"),
    })
    .map_err(|e| e.to_string())?;
    let embeddings = opt("embeddings.txt")
        .map(|p| EmbeddingTable::load(&p))
        .transpose()
        .map_err(|e| e.to_string())?;
    let full = !tables.is_empty() && embeddings.is_some();
    let note = format!(
        "{} lexicon tables, {} words, embeddings {}",
        tables.len(),
        lexicon.len(),
        embeddings
            .as_ref()
            .map_or("absent".to_string(), |e| format!("d={}", e.dimension()))
    );
    Ok(Installed {
        lexicon,
        embeddings,
        full,
        note,
    })
}

fn complex_entries() -> Option<Result<Vec<ReleasedEntry>, String>> {
    let dir = env_path("LCP_COMPLEX_DIR")?;
    Some(read_release_dir(&dir).map_err(|e| e.to_string()))
}

fn cwi_entries() -> Option<Result<Vec<ReleasedEntry>, String>> {
    let (y2018, y2016) = (env_path("LCP_CWI2018"), env_path("LCP_CWI2016"));
    if y2018.is_none() && y2016.is_none() {
        return None;
    }
    let mut out = Vec::new();
    if let Some(p) = y2018 {
        match read_cwi2018(&p) {
            Ok(rows) => out.extend(rows),
            Err(e) => return Some(Err(e.to_string())),
        }
    }
    if let Some(p) = y2016 {
        match read_cwi2016(&p) {
            Ok(rows) => out.extend(rows),
            Err(e) => return Some(Err(e.to_string())),
        }
    }
    Some(Ok(out))
}

fn singles(entries: &[ReleasedEntry]) -> Vec<ReleasedEntry> {
    entries.iter().filter(|e| !e.is_mwe).cloned().collect()
}

fn zero_groups(mut data: Dataset, spec: &str) -> Result<Dataset, EvalError> {
    for c in AblationSet::parse(spec)?.removed_columns(&data.layout) {
        data.x.column_mut(c).fill(0.0);
    }
    Ok(data)
}

// ---------------------------------------------------------------------------
// Likert mapping and aggregation.

const HEAVEN: [usize; 5] = [24, 1, 3, 0, 0];

fn record(instance: &str, annotator: &str, likert: u8, elapsed: f64) -> AnnotationRecord {
    AnnotationRecord {
        instance_id: instance.into(),
        annotator_id: annotator.into(),
        likert,
        elapsed,
        batch: 0,
        timestamp: Default::default(),
    }
}

fn likert_aggregation(c: &mut Checks) {
    let expected = [(1u8, 0.0), (2, 0.25), (3, 0.5), (4, 0.75), (5, 1.0)];
    let mapped: Vec<Option<f64>> = expected.iter().map(|(l, _)| map_likert(*l).ok()).collect();
    let exact = expected
        .iter()
        .zip(&mapped)
        .all(|((_, w), g)| *g == Some(*w));
    let rejects = map_likert(0).is_err() && map_likert(6).is_err();
    c.check(
        "mapping 1..5 -> 0, .25, .5, .75, 1",
        exact && rejects,
        format!("{mapped:?}"),
    );

    let descriptors = [
        (1, "Very Easy", "Words which were very familiar to an annotator."),
        (2, "Easy", "Words with which an annotator was aware of the meaning."),
        (3, "Neutral", "A word which was neither difficult nor easy."),
        (
            4,
            "Difficult",
            "Words which an annotator was unclear of the meaning, but may have been able to infer the meaning from the sentence.",
        ),
        (5, "Very Difficult", "Words that an annotator had never seen before, or were very unclear."),
    ];
    c.check(
        "descriptor table verbatim",
        LIKERT_SCALE == descriptors,
        "five labels and descriptors",
    );

    let mut records = Vec::new();
    let mut k = 0;
    for (i, n) in HEAVEN.iter().enumerate() {
        for _ in 0..*n {
            records.push(record("heaven", &format!("a{k:02}"), i as u8 + 1, 10.0));
            k += 1;
        }
    }
    match aggregate(&records, &QcConfig::default()) {
        Ok(agg) => match agg.labels.first() {
            Some(l) => c.check(
                "heaven aggregates to 0.0625",
                agg.labels.len() == 1 && l.n == 28 && near(l.mean, HEAVEN_MEAN, HEAVEN_TOL),
                format!("mean {:.12} over n={} (tol {HEAVEN_TOL:e})", l.mean, l.n),
            ),
            None => c.check("heaven aggregates to 0.0625", false, "instance dropped"),
        },
        Err(e) => c.error("heaven aggregates to 0.0625", e),
    }
}

// ---------------------------------------------------------------------------
// Shapiro-Wilk calibration.

const SHAPIRO_ROWS: [(&str, [usize; 5], f64); 7] = [
    ("heaven", [24, 1, 3, 0, 0], 0.423),
    ("election", [19, 1, 5, 0, 0], 0.544),
    ("granules", [0, 14, 2, 4, 0], 0.612),
    ("cubit", [2, 3, 4, 12, 8], 0.848),
    ("recital", [1, 11, 3, 9, 2], 0.848),
    ("peat", [2, 11, 3, 4, 4], 0.848),
    ("hippocampus", [1, 8, 7, 9, 2], 0.901),
];

fn expand(counts: &[usize; 5]) -> Vec<f64> {
    counts
        .iter()
        .enumerate()
        .flat_map(|(i, n)| std::iter::repeat_n(i as f64 / 4.0, *n))
        .collect()
}

fn shapiro_calibration(c: &mut Checks) {
    let start = Instant::now();
    let results: Vec<Option<f64>> = SHAPIRO_ROWS
        .iter()
        .map(|(_, counts, _)| shapiro_wilk(&expand(counts)))
        .collect();
    let elapsed = start.elapsed();
    for ((word, _, want), got) in SHAPIRO_ROWS.iter().zip(&results) {
        match got {
            Some(w) => c.check(
                &format!("W({word}) = {want}"),
                near(*w, *want, SHAPIRO_TOL),
                format!("got {w:.4} (tol {SHAPIRO_TOL})"),
            ),
            None => c.check(&format!("W({word}) = {want}"), false, "undefined"),
        }
    }
    c.check(
        "seven statistics under 1s",
        elapsed < SHAPIRO_BUDGET,
        format!("{:.3} ms", elapsed.as_secs_f64() * 1e3),
    );
}

// ---------------------------------------------------------------------------
// Binning.

fn binning(c: &mut Checks) {
    let below_02 = f64::from_bits(0.2f64.to_bits() - 1);
    let cases = [
        (0.0, 0usize),
        (below_02, 0),
        (0.2, 1),
        (0.4, 2),
        (0.6, 3),
        (0.8, 4),
        (1.0, 4),
    ];
    for (score, want) in cases {
        let got = ComplexityBin::from_score(score).map(ComplexityBin::index);
        c.check(
            &format!("bin({score:.17}) = {want}"),
            matches!(got, Ok(i) if i == want),
            format!("{got:?}"),
        );
    }
    let intervals: Vec<(f64, f64)> = (0..5)
        .map(|i| ComplexityBin::from_index(i).unwrap().interval())
        .collect();
    c.check(
        "intervals [0,.2) [.2,.4) [.4,.6) [.6,.8) [.8,1]",
        intervals == [(0.0, 0.2), (0.2, 0.4), (0.4, 0.6), (0.6, 0.8), (0.8, 1.0)],
        format!("{intervals:?}"),
    );
    let outside = [-1e-12, 1.0 + 1e-12, f64::NAN]
        .iter()
        .all(|s| ComplexityBin::from_score(*s).is_err());
    c.check(
        "scores outside [0, 1] rejected",
        outside,
        "-1e-12, 1+1e-12, NaN",
    );
}

// ---------------------------------------------------------------------------
// CompLex 2.0 reproduction.

const GENRE_MEANS: [(&str, Option<Genre>, f64); 12] = [
    ("all", None, 0.321),
    ("all", Some(Genre::Europarl), 0.303),
    ("all", Some(Genre::Biomed), 0.353),
    ("all", Some(Genre::Bible), 0.307),
    ("single", None, 0.302),
    ("single", Some(Genre::Europarl), 0.286),
    ("single", Some(Genre::Biomed), 0.325),
    ("single", Some(Genre::Bible), 0.293),
    ("mwe", None, 0.419),
    ("mwe", Some(Genre::Europarl), 0.388),
    ("mwe", Some(Genre::Biomed), 0.491),
    ("mwe", Some(Genre::Bible), 0.377),
];

fn complex_reproduction(c: &mut Checks) {
    match complex_entries() {
        None => c.skip(
            "mean complexity by subset and genre",
            unset("LCP_COMPLEX_DIR"),
        ),
        Some(Err(e)) => c.error("mean complexity by subset and genre", e),
        Some(Ok(entries)) => {
            for (subset, genre, want) in GENRE_MEANS {
                let vals: Vec<f64> = entries
                    .iter()
                    .filter(|e| match subset {
                        "single" => !e.is_mwe,
                        "mwe" => e.is_mwe,
                        _ => true,
                    })
                    .filter(|e| genre.as_ref().is_none_or(|g| &e.genre == g))
                    .map(|e| e.complexity)
                    .collect();
                let label = format!("{subset}/{}", genre.as_ref().map_or("total", Genre::as_str));
                if vals.is_empty() {
                    c.check(&format!("mean {label} = {want}"), false, "no rows");
                    continue;
                }
                let mean = vals.iter().sum::<f64>() / vals.len() as f64;
                c.check(
                    &format!("mean {label} = {want}"),
                    near(mean, want, GENRE_MEAN_TOL),
                    format!(
                        "got {mean:.4} over {} contexts (tol {GENRE_MEAN_TOL})",
                        vals.len()
                    ),
                );
            }
        }
    }
    match env_path("LCP_COMPLEX_ANNOTATIONS") {
        None => c.skip("subjectivity r = 0.621", unset("LCP_COMPLEX_ANNOTATIONS")),
        Some(p) => {
            let r = read_jsonl(&p)
                .and_then(|recs| aggregate(&recs, &QcConfig::default()))
                .and_then(|agg| subjectivity_correlation(&agg.labels));
            match r {
                Ok(Some(r)) => c.check(
                    "subjectivity r = 0.621",
                    near(r, SUBJECTIVITY_R, SUBJECTIVITY_TOL),
                    format!("got {r:.4} (tol {SUBJECTIVITY_TOL})"),
                ),
                Ok(None) => c.check("subjectivity r = 0.621", false, "undefined"),
                Err(e) => c.error("subjectivity r = 0.621", e),
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Regression numerics.

fn synthetic_design(n: usize, d: usize, seed: u64) -> Array2<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Array2::from_shape_fn((n, d), |(_, j)| {
        (j as f64 + 1.0) * rng.gen_range(-1.0..1.0) + j as f64
    })
}

fn regression_numerics(c: &mut Checks) {
    let beta = [0.5, -1.25, 2.0, 0.0, 3.5, -0.75];
    let intercept = 0.3;
    let x = synthetic_design(200, beta.len(), 11);
    let y: Array1<f64> = x.dot(&Array1::from(beta.to_vec())) + intercept;
    match train_regression(x.view(), y.view(), 0.0, "synthetic") {
        Ok(m) => {
            let err = m
                .weights
                .iter()
                .zip(&beta)
                .map(|(w, b)| (w - b).abs())
                .fold((m.intercept - intercept).abs(), f64::max);
            c.check(
                "noiseless recovery",
                err <= RECOVERY_TOL,
                format!("max |error| {err:.2e} (tol {RECOVERY_TOL:e})"),
            );
        }
        Err(e) => c.error("noiseless recovery", e),
    }

    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let noisy: Array1<f64> = y.mapv(|v| v + rng.gen_range(-0.5..0.5));
    match train_regression(x.view(), noisy.view(), 0.0, "synthetic")
        .and_then(|m| m.predict_rows("synthetic", x.view()))
    {
        Ok(pred) => {
            let r: Vec<f64> = noisy.iter().zip(&pred).map(|(y, p)| y - p).collect();
            let n = r.len() as f64;
            let mut worst = (r.iter().sum::<f64>() / n).abs();
            for col in x.columns() {
                worst = worst.max((col.iter().zip(&r).map(|(a, b)| a * b).sum::<f64>() / n).abs());
            }
            c.check(
                "residuals orthogonal to columns and intercept",
                worst <= ORTHOGONALITY_TOL,
                format!("max |mean(r * x_j)| {worst:.2e} (tol {ORTHOGONALITY_TOL:e})"),
            );
        }
        Err(e) => c.error("residuals orthogonal to columns and intercept", e),
    }

    let norms: Result<Vec<f64>, _> = RIDGE_LAMBDAS
        .iter()
        .map(|l| {
            train_regression(x.view(), noisy.view(), *l, "synthetic").map(|m| {
                m.standardized_weights
                    .iter()
                    .map(|w| w * w)
                    .sum::<f64>()
                    .sqrt()
            })
        })
        .collect();
    match norms {
        Ok(norms) => {
            let monotone = norms.windows(2).all(|w| w[1] <= w[0]) && norms[3] < norms[0];
            c.check(
                "shrinkage monotone over lambda in {0, 1e-4, 1e-2, 1}",
                monotone,
                format!("|b| = {norms:.6?}"),
            );
        }
        Err(e) => c.error("shrinkage monotone over lambda in {0, 1e-4, 1e-2, 1}", e),
    }
}

// ---------------------------------------------------------------------------
// Continuous prediction.

const TRANSFER: [(&[Genre], Genre, f64); 9] = [
    (&[Genre::Biomed], Genre::Europarl, 0.542),
    (&[Genre::Bible], Genre::Europarl, 0.484),
    (&[Genre::Bible, Genre::Biomed], Genre::Europarl, 0.651),
    (&[Genre::Bible], Genre::Biomed, 0.487),
    (&[Genre::Europarl], Genre::Biomed, 0.630),
    (&[Genre::Bible, Genre::Europarl], Genre::Biomed, 0.723),
    (&[Genre::Biomed], Genre::Bible, 0.605),
    (&[Genre::Europarl], Genre::Bible, 0.616),
    (&[Genre::Biomed, Genre::Europarl], Genre::Bible, 0.692),
];

fn mean_pearson(data: &Dataset) -> Result<Option<f64>, EvalError> {
    let seeds: Vec<u64> = (0..10).collect();
    Ok(repeated_holdout(data, &seeds, 0.9, DEFAULT_RIDGE_LAMBDA)?.mean_pearson)
}

fn continuous_prediction(c: &mut Checks) {
    let entries = match complex_entries() {
        None => {
            for name in [
                "10-seed Pearson 0.771",
                "cross-genre transfer",
                "length + frequency fallback",
            ] {
                c.skip(name, unset("LCP_COMPLEX_DIR"));
            }
            return;
        }
        Some(Err(e)) => return c.error("CompLex load", e),
        Some(Ok(e)) => singles(&e),
    };
    let res = match installed_resources() {
        Ok(r) => r,
        Err(e) => return c.error("resource load", e),
    };
    let data = match Dataset::from_released(&entries, &res.featurizer()) {
        Ok(d) => d,
        Err(e) => return c.error("featurize CompLex single", e),
    };

    if res.full {
        match mean_pearson(&data) {
            Ok(Some(r)) => c.check(
                "10-seed Pearson 0.771",
                near(r, SINGLE_PEARSON, SINGLE_PEARSON_TOL),
                format!(
                    "got {r:.4} over {} rows (tol {SINGLE_PEARSON_TOL}); {}",
                    data.len(),
                    res.note
                ),
            ),
            Ok(None) => c.check("10-seed Pearson 0.771", false, "undefined"),
            Err(e) => c.error("10-seed Pearson 0.771", e),
        }
        match cross_genre_table(&data, DEFAULT_RIDGE_LAMBDA) {
            Ok(rows) => {
                let lookup: HashMap<(Vec<Genre>, Genre), Option<f64>> = rows
                    .iter()
                    .map(|r| {
                        let mut train = r.train.clone();
                        train.sort();
                        ((train, r.test.clone()), r.pearson)
                    })
                    .collect();
                let mut ok = true;
                let mut detail = Vec::new();
                let mut got: HashMap<(Vec<Genre>, Genre), f64> = HashMap::new();
                for (train, test, want) in TRANSFER {
                    let mut key = train.to_vec();
                    key.sort();
                    let r = lookup.get(&(key.clone(), test.clone())).copied().flatten();
                    let names: Vec<&str> = train.iter().map(Genre::as_str).collect();
                    match r {
                        Some(r) => {
                            ok &= near(r, want, TRANSFER_TOL);
                            detail.push(format!("{}->{test} {r:.3}/{want}", names.join("+")));
                            got.insert((key, test), r);
                        }
                        None => {
                            ok = false;
                            detail.push(format!("{}->{test} missing", names.join("+")));
                        }
                    }
                }
                let ordered = TRANSFER.chunks(3).all(|rows| {
                    let key = |t: &[Genre], g: &Genre| {
                        let mut k = t.to_vec();
                        k.sort();
                        got.get(&(k, g.clone())).copied()
                    };
                    match (
                        key(rows[0].0, &rows[0].1),
                        key(rows[1].0, &rows[1].1),
                        key(rows[2].0, &rows[2].1),
                    ) {
                        (Some(a), Some(b), Some(both)) => both > a && both > b,
                        _ => false,
                    }
                });
                c.check(
                    "transfer ordering (pair beats each single genre)",
                    ordered,
                    detail.join(", "),
                );
                c.check(
                    "transfer values",
                    ok,
                    format!("tol {TRANSFER_TOL}; {}", detail.join(", ")),
                );
            }
            Err(e) => c.error("cross-genre transfer", e),
        }
    } else {
        c.skip(
            "10-seed Pearson 0.771",
            format!("full resource set not installed ({})", res.note),
        );
        c.skip(
            "cross-genre transfer",
            format!("full resource set not installed ({})", res.note),
        );
    }

    match zero_groups(data, "all but A,C,H,I,J").and_then(|d| mean_pearson(&d)) {
        Ok(Some(r)) => c.check(
            "length + frequency fallback Pearson >= 0.5",
            r >= FALLBACK_MIN_PEARSON,
            format!("got {r:.4}; {}", res.note),
        ),
        Ok(None) => c.check(
            "length + frequency fallback Pearson >= 0.5",
            false,
            "undefined",
        ),
        Err(e) => c.error("length + frequency fallback Pearson >= 0.5", e),
    }
}

// ---------------------------------------------------------------------------
// Categorical prediction.

fn bin_labels(y: &[f64]) -> Vec<ComplexityBin> {
    y.iter()
        .map(|v| ComplexityBin::from_score(*v).expect("score in range"))
        .collect()
}

struct ForestCv {
    weighted_f1: f64,
    mae_probability: f64,
    majority_f1: f64,
}

fn forest_cv(
    data: &Dataset,
    params: &ForestParams,
    folds: usize,
    seed: u64,
) -> Result<ForestCv, String> {
    let err = |e: &dyn std::fmt::Display| e.to_string();
    let layout = data.layout.layout_version.as_str();
    let bins = bin_labels(&data.y);
    let keys: Vec<usize> = bins.iter().map(|b| b.index()).collect();
    let fold_idx = kfold(data.len(), folds, seed, Some(&keys)).map_err(|e| err(&e))?;
    let (mut gold, mut pred, mut probs, mut majority) =
        (Vec::new(), Vec::new(), Vec::new(), Vec::new());
    for (f, test) in fold_idx.iter().enumerate() {
        let train = complement(data.len(), test);
        let xt = data.x.select(Axis(0), &train);
        let yt: Vec<ComplexityBin> = train.iter().map(|&i| bins[i]).collect();
        let mut counts = [0usize; 5];
        for b in &yt {
            counts[b.index()] += 1;
        }
        let top = (0..5)
            .max_by_key(|&i| (counts[i], std::cmp::Reverse(i)))
            .unwrap();
        let model = train_forest(xt.view(), &yt, params, cell_seed(seed, f as u64), layout)
            .map_err(|e| err(&e))?;
        let xs = data.x.select(Axis(0), test);
        for (row, cls) in test.iter().zip(
            model
                .classify_rows(layout, xs.view())
                .map_err(|e| err(&e))?,
        ) {
            gold.push(bins[*row]);
            pred.push(cls.bin);
            probs.push(cls.probabilities);
            majority.push(ComplexityBin::from_index(top).unwrap());
        }
    }
    let report = classification_report(&gold, &pred)
        .and_then(|r| r.with_probabilities(&gold, &probs))
        .map_err(|e| err(&e))?;
    let majority_f1 = classification_report(&gold, &majority)
        .map_err(|e| err(&e))?
        .weighted_f1;
    Ok(ForestCv {
        weighted_f1: report.weighted_f1,
        mae_probability: report.mae_probability.unwrap_or(f64::NAN),
        majority_f1,
    })
}

fn synthetic_dataset(n: usize, seed: u64) -> Dataset {
    let layout = FeatureLayout::new(4);
    let d = layout.len();
    let length = layout.range(lcp_core::features::GroupId::C).start;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let x = Array2::from_shape_fn((n, d), |_| rng.gen_range(0.0..1.0));
    let y: Vec<f64> = (0..n)
        .map(|i| {
            (0.1 + 0.6 * x[[i, length]] + 0.2 * x[[i, d - 1]] + rng.gen_range(-0.05f64..0.05))
                .clamp(0.0, 1.0)
        })
        .collect();
    let genres = (0..n)
        .map(|i| [Genre::Bible, Genre::Europarl, Genre::Biomed][i % 3].clone())
        .collect();
    Dataset::new(
        layout,
        (0..n).map(|i| format!("s{i}")).collect(),
        genres,
        vec![false; n],
        x,
        y,
    )
    .expect("valid dataset")
}

fn categorical_prediction(c: &mut Checks) {
    let data = synthetic_dataset(240, 31);
    let bins = bin_labels(&data.y);
    let params = ForestParams {
        n_trees: 24,
        ..ForestParams::default()
    };
    let train = |threads: usize, seed: u64| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .expect("pool")
            .install(|| {
                train_forest(data.x.view(), &bins, &params, seed, "synthetic").map(|m| m.to_json())
            })
    };
    match (train(1, 7), train(2, 7), train(4, 7), train(1, 8)) {
        (Ok(a), Ok(b), Ok(d), Ok(other)) => {
            c.check(
                "forest JSON byte-identical at 1, 2 and 4 threads",
                a == b && a == d,
                format!("{} bytes", a.len()),
            );
            c.check("forest depends on its seed", a != other, "seed 7 vs 8");
        }
        (a, b, d, e) => {
            let first = [a, b, d, e].into_iter().find_map(Result::err).unwrap();
            c.error("forest JSON byte-identical at 1, 2 and 4 threads", first);
        }
    }

    let entries = match complex_entries() {
        None => {
            c.skip("weighted F1 > majority baseline", unset("LCP_COMPLEX_DIR"));
            c.skip("forest F1 and MAE targets", unset("LCP_COMPLEX_DIR"));
            return;
        }
        Some(Err(e)) => return c.error("CompLex load", e),
        Some(Ok(e)) => e,
    };
    let res = match installed_resources() {
        Ok(r) => r,
        Err(e) => return c.error("resource load", e),
    };
    let targets = [
        ("single", false, 0.607, 0.1782),
        ("mwe", true, 0.568, 0.2137),
    ];
    for (name, mwe, f1_want, mae_want) in targets {
        let subset: Vec<ReleasedEntry> = entries
            .iter()
            .filter(|e| e.is_mwe == mwe)
            .cloned()
            .collect();
        let cv = Dataset::from_released(&subset, &res.featurizer())
            .map_err(|e| e.to_string())
            .and_then(|d| forest_cv(&d, &ForestParams::default(), 10, 0));
        match cv {
            Ok(cv) => {
                c.check(
                    &format!("{name}: weighted F1 > majority baseline"),
                    cv.weighted_f1 > cv.majority_f1,
                    format!(
                        "F1 {:.4} vs majority {:.4}; {}",
                        cv.weighted_f1, cv.majority_f1, res.note
                    ),
                );
                if res.full {
                    c.check(
                        &format!("{name}: forest target F1 {f1_want}, MAE {mae_want}"),
                        near(cv.weighted_f1, f1_want, FOREST_TARGET_TOL) && near(cv.mae_probability, mae_want, FOREST_TARGET_TOL),
                        format!(
                            "F1 {:.4}, MAE {:.4} (tol {FOREST_TARGET_TOL}); deviations F1 {:+.4}, MAE {:+.4}",
                            cv.weighted_f1,
                            cv.mae_probability,
                            cv.weighted_f1 - f1_want,
                            cv.mae_probability - mae_want
                        ),
                    );
                } else {
                    c.skip(
                        &format!("{name}: forest target F1 {f1_want}, MAE {mae_want}"),
                        format!("full resource set not installed ({})", res.note),
                    );
                }
            }
            Err(e) => c.error(&format!("{name}: forest cross-validation"), e),
        }
    }
}

// ---------------------------------------------------------------------------
// Ablation driver.

fn ablation_driver(c: &mut Checks) {
    let data = synthetic_dataset(150, 41);
    let trainers: [(&str, Box<dyn Trainer>); 2] = [
        (
            "regression",
            Box::new(RegressionTrainer {
                ridge_lambda: DEFAULT_RIDGE_LAMBDA,
            }),
        ),
        (
            "forest",
            Box::new(ForestTrainer {
                params: ForestParams {
                    n_trees: 10,
                    ..ForestParams::default()
                },
            }),
        ),
    ];
    for (name, trainer) in &trainers {
        let sets = [
            AblationSet::parse("").unwrap(),
            AblationSet::parse("none").unwrap(),
        ];
        match ablate(&data, &sets, trainer.as_ref(), 5, 3) {
            Ok(report) => {
                let zero = report.results.iter().all(|r| {
                    r.delta_mae == 0.0 && r.mae == report.baseline_mae && r.n_removed == 0
                });
                let deltas: Vec<f64> = report.results.iter().map(|r| r.delta_mae).collect();
                c.check(
                    &format!("empty set dMAE exactly 0 ({name})"),
                    zero,
                    format!("{deltas:?}"),
                );
            }
            Err(e) => c.error(&format!("empty set dMAE exactly 0 ({name})"), e),
        }
    }

    let Some(path) = env_path("LCP_CWI2018") else {
        return c.skip("CWI-2018 all but C: dMAE < 0", unset("LCP_CWI2018"));
    };
    let res = match installed_resources() {
        Ok(r) if r.full => r,
        Ok(r) => {
            return c.skip(
                "CWI-2018 all but C: dMAE < 0",
                format!("full resource set not installed ({})", r.note),
            )
        }
        Err(e) => return c.error("resource load", e),
    };
    let result = read_cwi2018(&path)
        .map_err(|e| e.to_string())
        .and_then(|rows| {
            Dataset::from_released(&singles(&rows), &res.featurizer()).map_err(|e| e.to_string())
        })
        .and_then(|d| {
            let trainer = ForestTrainer {
                params: ForestParams::default(),
            };
            ablate(
                &d,
                &[AblationSet::parse("all but C").unwrap()],
                &trainer,
                10,
                0,
            )
            .map_err(|e| e.to_string())
        });
    match result {
        Ok(report) => {
            let delta = report.results[0].delta_mae;
            c.check(
                "CWI-2018 all but C: dMAE < 0",
                delta < 0.0,
                format!("dMAE {delta:+.4} (baseline MAE {:.4})", report.baseline_mae),
            );
        }
        Err(e) => c.error("CWI-2018 all but C: dMAE < 0", e),
    }
}

// ---------------------------------------------------------------------------
// Correlation metrics.

/// Doubled ranks by counting: 2 * (#smaller) + #equal + 1.
fn doubled_ranks(x: &[i64]) -> Vec<i64> {
    x.iter()
        .map(|v| {
            let less = x.iter().filter(|w| *w < v).count() as i64;
            let eq = x.iter().filter(|w| *w == v).count() as i64;
            2 * less + eq + 1
        })
        .collect()
}

/// Spearman from integer sums; `None` when either side is constant.
fn oracle_spearman(a: &[i64], b: &[i64]) -> Option<f64> {
    let (ra, rb) = (doubled_ranks(a), doubled_ranks(b));
    let n = a.len() as i64;
    let (sa, sb): (i64, i64) = (ra.iter().sum(), rb.iter().sum());
    let sab: i64 = ra.iter().zip(&rb).map(|(x, y)| x * y).sum();
    let saa: i64 = ra.iter().map(|x| x * x).sum();
    let sbb: i64 = rb.iter().map(|x| x * x).sum();
    let (num, da, db) = (n * sab - sa * sb, n * saa - sa * sa, n * sbb - sb * sb);
    if da == 0 || db == 0 {
        return None;
    }
    Some(num as f64 / ((da as f64).sqrt() * (db as f64).sqrt()))
}

fn all_vectors(n: usize) -> Vec<Vec<i64>> {
    (0..3usize.pow(n as u32))
        .map(|mut code| {
            (0..n)
                .map(|_| {
                    let v = (code % 3) as i64 + 1;
                    code /= 3;
                    v
                })
                .collect()
        })
        .collect()
}

fn correlation_metrics(c: &mut Checks) {
    let mut pairs = 0usize;
    let mut worst = 0.0f64;
    let mut mismatch: Option<String> = None;
    let as_f = |v: &[i64]| v.iter().map(|x| *x as f64).collect::<Vec<f64>>();
    for n in 1..=8 {
        let vectors = all_vectors(n);
        let partners: Vec<Vec<i64>> = if n <= 6 {
            vectors.clone()
        } else {
            let ascending: Vec<i64> = (1..=n as i64).collect();
            let descending: Vec<i64> = ascending.iter().rev().copied().collect();
            let tied: Vec<i64> = (0..n as i64).map(|i| (i * 7) % 3 + 1).collect();
            vec![ascending, descending, tied]
        };
        for a in &vectors {
            let fa = as_f(a);
            if n >= 3 {
                let ranks = average_ranks(&fa);
                let oracle: Vec<f64> = doubled_ranks(a).iter().map(|r| *r as f64 / 2.0).collect();
                if ranks != oracle && mismatch.is_none() {
                    mismatch = Some(format!("ranks of {a:?}: {ranks:?} vs {oracle:?}"));
                }
            }
            let mut rotated = a.clone();
            rotated.rotate_left(1);
            for b in partners.iter().chain(std::iter::once(&rotated)) {
                pairs += 1;
                let got = spearman(&fa, &as_f(b));
                if n < 3 {
                    if !matches!(got, Err(EvalError::TooFew { .. })) && mismatch.is_none() {
                        mismatch = Some(format!("n={n} should be too few: {got:?}"));
                    }
                    continue;
                }
                match (got, oracle_spearman(a, b)) {
                    (Ok(Some(g)), Some(o)) => worst = worst.max((g - o).abs()),
                    (Ok(None), None) => {}
                    (g, o) => {
                        if mismatch.is_none() {
                            mismatch = Some(format!("{a:?} vs {b:?}: {g:?} vs {o:?}"));
                        }
                    }
                }
            }
        }
    }
    c.check(
        "Spearman vs counting-rank oracle, {1,2,3}^n, n <= 8",
        mismatch.is_none() && worst <= SPEARMAN_ORACLE_TOL,
        match &mismatch {
            Some(m) => m.clone(),
            None => format!("{pairs} pairs, ranks identical, max |drho| {worst:.1e} (tol {SPEARMAN_ORACLE_TOL:e})"),
        },
    );

    match pearson(&[1.0, 2.0, 3.0, 4.0, 5.0], &[1.0, 3.0, 2.0, 5.0, 4.0]) {
        Ok(Some(r)) => c.check(
            "Pearson hand case 8/sqrt(10*10) = 0.8",
            near(r, 0.8, PEARSON_HAND_TOL),
            format!("got {r:.17}"),
        ),
        other => c.check(
            "Pearson hand case 8/sqrt(10*10) = 0.8",
            false,
            format!("{other:?}"),
        ),
    }

    let rows = match cwi_entries() {
        None => {
            c.skip(
                "CWI length rho 0.4208",
                "LCP_CWI2018 and LCP_CWI2016 not set",
            );
            c.skip(
                "CWI Brown-frequency rho -0.3640",
                "LCP_CWI2018 and LCP_CWI2016 not set",
            );
            return;
        }
        Some(Err(e)) => return c.error("CWI load", e),
        Some(Ok(rows)) => singles(&rows),
    };
    let (len, y): (Vec<f64>, Vec<f64>) = rows
        .iter()
        .filter_map(|e| normalized_length(&e.token).ok().map(|l| (l, e.complexity)))
        .unzip();
    match spearman(&len, &y) {
        Ok(Some(r)) => c.check(
            "CWI length rho 0.4208",
            near(r, RHO_LENGTH, RHO_TOL),
            format!("got {r:.4} over {} words (tol {RHO_TOL})", len.len()),
        ),
        other => c.check("CWI length rho 0.4208", false, format!("{other:?}")),
    }
    let res = match installed_resources() {
        Ok(r) if !r.lexicon.is_empty() => r,
        Ok(_) => {
            return c.skip(
                "CWI Brown-frequency rho -0.3640",
                "no lexicon tables installed",
            )
        }
        Err(e) => return c.error("resource load", e),
    };
    let (freq, y): (Vec<f64>, Vec<f64>) = rows
        .iter()
        .filter_map(|e| {
            res.lexicon
                .get(&e.token.to_lowercase())
                .and_then(|r| r.brown_freq)
                .map(|f| (f as f64, e.complexity))
        })
        .unzip();
    match spearman(&freq, &y) {
        Ok(Some(r)) => c.check(
            "CWI Brown-frequency rho -0.3640",
            near(r, RHO_BROWN, RHO_TOL),
            format!(
                "got {r:.4} over {} words with a Brown count (tol {RHO_TOL})",
                freq.len()
            ),
        ),
        other => c.check(
            "CWI Brown-frequency rho -0.3640",
            false,
            format!("{other:?}"),
        ),
    }
}

// ---------------------------------------------------------------------------
// Corpus construction.

fn band_word_freq(band: usize, k: usize, of: usize) -> u64 {
    let b = FREQUENCY_BANDS[band];
    b.lo + (b.hi - b.lo) * k as u64 / (of as u64 - 1).max(1)
}

/// Ten thousand tagged sentences over three genres. Biomed draws from a small
/// vocabulary so that its quota cannot be met.
fn synthetic_corpus() -> (Vec<TaggedSentence>, FrequencyTable) {
    let mut table = String::from("word\tcount\n");
    let mut nouns: Vec<String> = Vec::new();
    for band in 0..8 {
        for k in 0..15 {
            let w = format!("noun{band}x{k}");
            table.push_str(&format!("{w}\t{}\n", band_word_freq(band, k, 15)));
            nouns.push(w);
        }
    }
    for k in 0..10 {
        table.push_str(&format!("hapax{k}\t1\nubiquity{k}\t50000\n"));
        nouns.push(format!("hapax{k}"));
        nouns.push(format!("ubiquity{k}"));
        nouns.push(format!("unlisted{k}"));
    }
    let mut adjectives: Vec<String> = Vec::new();
    for k in 0..24 {
        let w = format!("adj{k}");
        table.push_str(&format!("{w}\t{}\n", band_word_freq(k % 8, k / 8, 3)));
        adjectives.push(w);
    }
    let narrow: Vec<String> = (0..3)
        .flat_map(|b| (0..4).map(move |k| format!("noun{b}x{k}")))
        .collect();
    let verbs = ["saw", "made", "found", "kept", "moved"];
    let patterns: [&[&str]; 5] = [
        &["DT", "NN", "VBD", "DT", "JJ", "NN", "."],
        &["DT", "NN", "NN", "VBD", "IN", "DT", "NN", "."],
        &["DT", "JJ", "NN", "NN", "VBD", "."],
        &["DT", "NN", "NN", "NN", "VBD", "."],
        &["PRP", "VBD", "DT", "NNS", "."],
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let genres = [Genre::Bible, Genre::Europarl, Genre::Biomed];
    let mut sentences = Vec::with_capacity(10_000);
    for i in 0..10_000 {
        let genre = genres[i % 3].clone();
        let vocab = if genre == Genre::Biomed {
            &narrow
        } else {
            &nouns
        };
        let pattern = patterns[rng.gen_range(0..patterns.len())];
        let pairs: Vec<(String, String)> = pattern
            .iter()
            .map(|tag| {
                let w = match *tag {
                    "DT" => "the".to_string(),
                    "IN" => "of".to_string(),
                    "PRP" => "they".to_string(),
                    "." => ".".to_string(),
                    "VBD" => verbs[rng.gen_range(0..verbs.len())].to_string(),
                    "JJ" => adjectives[rng.gen_range(0..adjectives.len())].clone(),
                    _ => vocab[rng.gen_range(0..vocab.len())].clone(),
                };
                (w, tag.to_string())
            })
            .collect();
        sentences.push(TaggedSentence::from_pairs(genre, pairs).expect("valid sentence"));
    }
    let table = FrequencyTable::parse(&table, Path::new("synthetic")).expect("valid table");
    (sentences, table)
}

type MweCase = (&'static [(&'static str, &'static str)], Vec<TokenSpan>);

fn mwe_pattern_suite() -> Result<(), String> {
    let cases: [MweCase; 6] = [
        (
            &[("a", "DT"), ("storage", "NN"), ("box", "NN"), (".", ".")],
            vec![TokenSpan::pair(1)],
        ),
        (
            &[("a", "DT"), ("ready", "JJ"), ("meal", "NN"), (".", ".")],
            vec![TokenSpan::pair(1)],
        ),
        (
            &[("an", "DT"), ("electric", "JJ"), ("vehicle", "NN")],
            vec![TokenSpan::pair(1)],
        ),
        (
            &[("a", "DT"), ("hot", "NN"), ("dog", "NN"), ("stand", "VB")],
            vec![TokenSpan::pair(1)],
        ),
        (
            &[
                ("the", "DT"),
                ("European", "JJ"),
                ("Union", "NNP"),
                ("voted", "VBD"),
            ],
            vec![TokenSpan::pair(1)],
        ),
        (
            &[("storage", "NN"), ("box", "NN"), ("lid", "NN")],
            vec![TokenSpan::pair(1)],
        ),
    ];
    for (pairs, want) in cases {
        let s = TaggedSentence::from_pairs(Genre::Bible, pairs.iter().copied())
            .map_err(|e| e.to_string())?;
        let got = extract_mwe_candidates(&s);
        if got != want {
            return Err(format!("{pairs:?}: got {got:?}, want {want:?}"));
        }
    }
    Ok(())
}

fn corpus_construction(c: &mut Checks) {
    let (sentences, table) = synthetic_corpus();
    let mut quota = GenreQuota::new();
    for g in [Genre::Bible, Genre::Europarl] {
        quota.insert(
            g,
            Quota {
                singles: 300,
                mwes: 60,
            },
        );
    }
    quota.insert(
        Genre::Biomed,
        Quota {
            singles: 100,
            mwes: 20,
        },
    );
    let sel = select_targets(&sentences, &table, &quota, 5);
    c.check(
        "synthetic fixture has 10,000 sentences",
        sentences.len() == 10_000,
        format!("{} instances selected", sel.instances.len()),
    );

    let mut tally: BTreeMap<(String, bool, usize), usize> = BTreeMap::new();
    let mut outside = Vec::new();
    let mut wrong_kind = Vec::new();
    for inst in &sel.instances {
        let words = inst.constituents();
        match table.get_phrase(&words).and_then(assign_frequency_band) {
            Some(band) => {
                *tally
                    .entry((inst.genre.to_string(), inst.is_mwe, band.index))
                    .or_default() += 1
            }
            None => outside.push(inst.id.clone()),
        }
        let tokens = &sentences[inst.sentence_index].tokens;
        let tags: Vec<&str> = tokens[inst.span.start..=inst.span.end]
            .iter()
            .map(|t| t.pos.as_str())
            .collect();
        let ok = if inst.is_mwe {
            tags.len() == 2
                && extract_mwe_candidates(&sentences[inst.sentence_index]).contains(&inst.span)
        } else {
            tags.len() == 1 && is_noun_tag(tags[0])
        };
        if !ok {
            wrong_kind.push(inst.id.clone());
        }
    }
    let mut band_mismatch = Vec::new();
    let allocated: usize = sel.report.allocations.iter().map(|a| a.allocated).sum();
    if allocated != sel.instances.len() {
        band_mismatch.push(format!(
            "{allocated} allocated, {} selected",
            sel.instances.len()
        ));
    }
    for a in &sel.report.allocations {
        let key = (a.genre.to_string(), a.kind == TargetKind::Mwe, a.band);
        let got = tally.get(&key).copied().unwrap_or(0);
        if got != a.allocated {
            band_mismatch.push(format!(
                "{key:?}: {got} selected, {} allocated",
                a.allocated
            ));
        }
    }
    c.check(
        "every target's frequency lies in its band",
        outside.is_empty() && band_mismatch.is_empty(),
        if outside.is_empty() && band_mismatch.is_empty() {
            format!(
                "{} (genre, kind, band) cells agree with the allocation report",
                tally.len()
            )
        } else {
            format!("outside: {outside:?}; mismatched: {band_mismatch:?}")
        },
    );
    c.check(
        "singles are nouns, MWEs match the pattern",
        wrong_kind.is_empty(),
        format!("{wrong_kind:?}"),
    );

    let mut per_token: HashMap<(String, String), Vec<&Instance>> = HashMap::new();
    for inst in &sel.instances {
        per_token
            .entry((inst.genre.to_string(), inst.surface.to_lowercase()))
            .or_default()
            .push(inst);
    }
    let max = per_token.values().map(Vec::len).max().unwrap_or(0);
    let distinct = per_token.values().all(|v| {
        let texts: HashSet<&str> = v.iter().map(|i| i.sentence.as_str()).collect();
        texts.len() == v.len()
    });
    c.check(
        "at most 5 contexts per (token, genre), all distinct",
        max <= MAX_INSTANCES_PER_TOKEN && distinct,
        format!("max {max} over {} (genre, token) keys", per_token.len()),
    );

    let count = |g: &Genre, mwe: bool| {
        sel.instances
            .iter()
            .filter(|i| &i.genre == g && i.is_mwe == mwe)
            .count()
    };
    let mut problems = Vec::new();
    for (g, q) in &quota {
        for (mwe, wanted) in [(false, q.singles), (true, q.mwes)] {
            let got = count(g, mwe);
            let reported =
                sel.report.shortfalls.iter().find(|s| {
                    &s.genre == g && s.band.is_none() && (s.kind == TargetKind::Mwe) == mwe
                });
            match reported {
                Some(s) if got < wanted && s.requested == wanted && s.available == got => {}
                None if got == wanted => {}
                _ => problems.push(format!(
                    "{g} mwe={mwe}: wanted {wanted}, got {got}, report {reported:?}"
                )),
            }
        }
    }
    let biomed_short = count(&Genre::Biomed, false) < 100;
    c.check(
        "quota shortfalls reported exactly",
        problems.is_empty() && biomed_short,
        if problems.is_empty() {
            format!(
                "{} shortfall entries; biomed singles {}/100",
                sel.report.shortfalls.len(),
                count(&Genre::Biomed, false)
            )
        } else {
            problems.join("; ")
        },
    );

    match mwe_pattern_suite() {
        Ok(()) => c.check(
            "MWE pattern suite and NNN rejection",
            true,
            "5 pattern rows + storage box lid",
        ),
        Err(e) => c.check("MWE pattern suite and NNN rejection", false, e),
    }
}

// ---------------------------------------------------------------------------
// Quality control and service replay.

fn qc_records() -> Vec<AnnotationRecord> {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let mut out = Vec::new();
    for a in 0..6 {
        for i in 0..30 {
            out.push(record(
                &format!("i{i:02}"),
                &format!("v{a}"),
                rng.gen_range(1..=5),
                12.0,
            ));
        }
    }
    for i in 0..30 {
        out.push(record(&format!("i{i:02}"), "flat", 3, 12.0));
    }
    for a in 0..3 {
        out.push(record("sparse", &format!("v{a}"), 2, 12.0));
    }
    out.push(record("sparse", "flat", 3, 12.0));
    for a in 0..4 {
        out.push(record("enough", &format!("v{a}"), 4, 12.0));
    }
    out
}

fn service_instances(n: usize) -> Vec<Instance> {
    (0..n)
        .map(|i| Instance {
            id: format!("q{i:03}"),
            genre: Genre::Bible,
            sentence: format!("The word{i} stood here ."),
            sentence_index: i,
            span: TokenSpan::single(1),
            surface: format!("word{i}"),
            is_mwe: false,
            pos: "NN".into(),
        })
        .collect()
}

/// Round-robin annotation until no one is served. `flat` always answers 3.
fn annotate_until_idle(
    svc: &mut AnnotationService,
    clock: &ManualClock,
    annotators: &[Registration],
    flat: &str,
    rng: &mut ChaCha8Rng,
) -> Result<usize, ServiceError> {
    let mut total = 0;
    loop {
        let mut round = 0;
        for a in annotators {
            let served = match svc.next_instance(&a.token) {
                Ok(s) => s,
                Err(ServiceError::Forbidden(_)) => continue,
                Err(e) => return Err(e),
            };
            let Some(inst) = served else { continue };
            clock.advance(chrono::Duration::seconds(9));
            let likert = if a.annotator_id == flat {
                3
            } else {
                rng.gen_range(1..=5)
            };
            svc.submit(&Submission {
                token: a.token.clone(),
                instance_id: inst.instance_id,
                likert,
                elapsed_ms: 8000.0,
            })?;
            round += 1;
        }
        if round == 0 {
            return Ok(total);
        }
        total += round;
    }
}

fn service_replay() -> Result<String, String> {
    let err = |e: ServiceError| e.to_string();
    let dir = tempfile::TempDir::new().map_err(|e| e.to_string())?;
    let log = dir.path().join("service.jsonl");
    let instances = service_instances(30);
    let config = ServiceConfig {
        annotations_target: 3,
        batch_size: 10,
        seed: 5,
        qc: QcConfig::default(),
    };
    let clock = Arc::new(ManualClock::new(Default::default()));
    let dyn_clock: Arc<dyn Clock> = clock.clone();
    let mut rng = ChaCha8Rng::seed_from_u64(9);

    let mut svc = AnnotationService::open(
        instances.clone(),
        config.clone(),
        None,
        dyn_clock.clone(),
        &log,
    )
    .map_err(err)?;
    let annotators: Vec<Registration> = (0..5)
        .map(|_| svc.register())
        .collect::<Result<_, _>>()
        .map_err(err)?;
    let flat = annotators[0].annotator_id.clone();
    let first = annotate_until_idle(&mut svc, &clock, &annotators, &flat, &mut rng).map_err(err)?;
    let review = svc
        .review_batch(
            0,
            &ReviewRequest {
                reject_flagged: true,
                ..ReviewRequest::default()
            },
        )
        .map_err(err)?;
    let voided: usize = review.voided.iter().map(|v| v.records_voided).sum();
    if review.voided.len() != 1
        || review.voided[0].annotator_id != flat
        || review.released != Some(1)
    {
        return Err(format!(
            "review did not void only the flat annotator: {review:?}"
        ));
    }
    let second =
        annotate_until_idle(&mut svc, &clock, &annotators, &flat, &mut rng).map_err(err)?;
    if !matches!(
        svc.next_instance(&annotators[0].token),
        Err(ServiceError::Forbidden(_))
    ) {
        return Err("rejected annotator was served".into());
    }
    svc.review_batch(1, &ReviewRequest::default())
        .map_err(err)?;
    let pending = svc
        .next_instance(&annotators[1].token)
        .map_err(err)?
        .ok_or("nothing served after releasing batch 2")?;
    let before = svc.snapshot();
    let exported = svc.export();
    drop(svc);

    let mut reopened = AnnotationService::open(
        instances.clone(),
        config.clone(),
        None,
        dyn_clock.clone(),
        &log,
    )
    .map_err(err)?;
    let events = read_journal(&log).map_err(err)?;
    let replayed =
        AnnotationService::replay(instances, config, None, dyn_clock, &events).map_err(err)?;
    if reopened.snapshot() != before
        || replayed.snapshot() != before
        || reopened.export() != exported
    {
        return Err("state after replay differs from the live state".into());
    }
    let again = reopened.next_instance(&annotators[1].token).map_err(err)?;
    if again.map(|s| s.instance_id) != Some(pending.instance_id) {
        return Err("pending instance not re-served after restart".into());
    }
    Ok(format!(
        "{} events, {first}+{second} submissions, {voided} voided, {} live records",
        events.len(),
        exported.len()
    ))
}

fn quality_control(c: &mut Checks) {
    let records = qc_records();
    let qc = QcConfig::default();
    let (kept, report) = filter_annotators(&records, &qc, None);
    let flat_rejected = report.rejected.iter().any(|r| {
        r.annotator_id == "flat"
            && r.reasons
                .iter()
                .any(|x| matches!(x, RejectReason::Uniform { likert: 3 }))
    });
    let only_flat = report.rejected.len() == 1;
    c.check(
        "uniform annotator rejected",
        flat_rejected && only_flat && kept.iter().all(|r| r.annotator_id != "flat"),
        format!(
            "rejected {:?}",
            report
                .rejected
                .iter()
                .map(|r| &r.annotator_id)
                .collect::<Vec<_>>()
        ),
    );

    match aggregate(&kept, &qc) {
        Ok(agg) => {
            let sparse = agg.dropped.iter().find(|d| d.instance_id == "sparse");
            let enough_kept = agg
                .labels
                .iter()
                .any(|l| l.instance_id == "enough" && l.n == 4);
            let logged = sparse
                .is_some_and(|d| d.n == 3 && d.reason.contains('3') && d.reason.contains('4'));
            c.check(
                "instances below 4 valid annotations dropped with reasons",
                logged && enough_kept && agg.dropped.len() == 1,
                sparse.map_or("sparse not dropped".to_string(), |d| {
                    format!("sparse: {}", d.reason)
                }),
            );
        }
        Err(e) => c.error(
            "instances below 4 valid annotations dropped with reasons",
            e,
        ),
    }

    let scores: Vec<f64> = expand(&HEAVEN);
    let shuffled: Vec<f64> = scores.iter().rev().copied().collect();
    let same = label_from_scores("a", &scores).ok().map(|l| l.mean)
        == label_from_scores("a", &shuffled).ok().map(|l| l.mean);
    c.check(
        "aggregation independent of record order",
        same,
        "heaven forwards and reversed",
    );

    match service_replay() {
        Ok(detail) => c.check(
            "full-log replay reconstructs identical service state",
            true,
            detail,
        ),
        Err(e) => c.check(
            "full-log replay reconstructs identical service state",
            false,
            e,
        ),
    }
}

// ---------------------------------------------------------------------------

type Criterion = (&'static str, &'static str, fn(&mut Checks));

fn main() -> ExitCode {
    if std::env::args().any(|a| a == "--list") {
        return ExitCode::SUCCESS;
    }
    let require = std::env::var("LCP_REQUIRE_DATASETS").is_ok_and(|v| v == "1");
    let criteria: [Criterion; 11] = [
        (
            "likert",
            "Likert mapping and aggregation",
            likert_aggregation,
        ),
        ("shapiro", "Shapiro-Wilk calibration", shapiro_calibration),
        ("binning", "Complexity binning boundaries", binning),
        ("complex", "CompLex 2.0 reproduction", complex_reproduction),
        ("regression", "Regression numerics", regression_numerics),
        ("continuous", "Continuous prediction", continuous_prediction),
        (
            "categorical",
            "Categorical prediction",
            categorical_prediction,
        ),
        ("ablation", "Ablation driver", ablation_driver),
        ("correlation", "Correlation metrics", correlation_metrics),
        ("corpus", "Corpus construction", corpus_construction),
        ("qc", "Quality control and replay", quality_control),
    ];
    let mut failed = 0;
    let mut skipped = 0;
    println!("acceptance report");
    for (id, title, run) in criteria {
        let mut checks = Checks::default();
        if let Err(panic) = catch_unwind(AssertUnwindSafe(|| run(&mut checks))) {
            let msg = panic
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| panic.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panic".into());
            checks.check(
                "criterion ran to completion",
                false,
                format!("panicked: {msg}"),
            );
        }
        if require {
            for ch in &mut checks.0 {
                if ch.status == Status::Skip {
                    ch.status = Status::Fail;
                    ch.detail = format!("required dataset missing: {}", ch.detail);
                }
            }
        }
        let n_fail = checks.0.iter().filter(|c| c.status == Status::Fail).count();
        let n_skip = checks.0.iter().filter(|c| c.status == Status::Skip).count();
        let status = if n_fail > 0 {
            Status::Fail
        } else if n_skip == checks.0.len() {
            Status::Skip
        } else {
            Status::Pass
        };
        let note = if n_skip > 0 && status != Status::Skip {
            format!(" ({n_skip} of {} checks skipped)", checks.0.len())
        } else {
            String::new()
        };
        println!("{} {id:<12} {title}{note}", status.tag());
        for ch in &checks.0 {
            println!(
                "     {} {}: {}",
                ch.status.tag().to_lowercase(),
                ch.name,
                ch.detail
            );
        }
        failed += usize::from(status == Status::Fail);
        skipped += n_skip;
    }
    println!("{failed} criteria failed, {skipped} dataset-gated checks skipped");
    if failed > 0 {
        ExitCode::FAILURE
    } else {
        ExitCode::SUCCESS
    }
}
