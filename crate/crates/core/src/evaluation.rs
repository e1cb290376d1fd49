//! Effectiveness and efficiency measurement against ground truth: Top-1 F1,
//! Top-N accuracy, single-component ablation and per-matcher timings.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::io::{Read, Write};
use std::path::Path;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::ensemble::{COMPONENTS, ComponentTimings, Exclusions, Scorer, Suggestion, rank, rank_excluding};
use crate::error::{Error, Result};
use crate::model::{Dataset, KnownPair, MatcherConfig, ScoreMatrix, fold};
use crate::schema::RuleSet;

/// Largest N reported by Top-N accuracy.
pub const MAX_TOP_N: usize = 4;

/// True correspondences, at most one destination per source attribute.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct GroundTruth {
    pairs: Vec<(String, String)>,
    by_source: HashMap<String, usize>,
}

#[derive(Deserialize)]
struct TruthRow {
    source_attr: String,
    dest_attr: String,
}

impl GroundTruth {
    pub fn new(pairs: impl IntoIterator<Item = (String, String)>) -> Result<Self> {
        let mut gt = GroundTruth::default();
        for (row, (s, d)) in pairs.into_iter().enumerate() {
            if gt.by_source.insert(fold(&s), gt.pairs.len()).is_some() {
                return Err(Error::InvalidGroundTruth {
                    row: row + 1,
                    message: format!("source attribute `{s}` appears more than once"),
                });
            }
            gt.pairs.push((s, d));
        }
        Ok(gt)
    }

    /// Reads a CSV with header `source_attr,dest_attr`.
    pub fn from_csv_reader<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::Reader::from_reader(reader);
        let mut pairs = Vec::new();
        for (i, row) in rdr.deserialize::<TruthRow>().enumerate() {
            let row = row.map_err(|e| Error::InvalidGroundTruth {
                row: i + 1,
                message: e.to_string(),
            })?;
            pairs.push((row.source_attr, row.dest_attr));
        }
        Self::new(pairs)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        Self::from_csv_reader(file)
    }

    /// Checks that every row names attributes that exist.
    pub fn validate(&self, source: &Dataset, dest: &Dataset) -> Result<()> {
        for (i, (s, d)) in self.pairs.iter().enumerate() {
            let missing = if source.attribute(s).is_none() {
                Some(format!("unknown source attribute `{s}`"))
            } else if dest.attribute(d).is_none() {
                Some(format!("unknown destination attribute `{d}`"))
            } else {
                None
            };
            if let Some(message) = missing {
                return Err(Error::InvalidGroundTruth { row: i + 1, message });
            }
        }
        Ok(())
    }

    pub fn pairs(&self) -> &[(String, String)] {
        &self.pairs
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn dest_for(&self, source_attr: &str) -> Option<&str> {
        self.by_source
            .get(&fold(source_attr))
            .map(|&i| self.pairs[i].1.as_str())
    }

    /// Drops rows whose source attribute is already given as a known pair;
    /// those are inputs, not predictions.
    pub fn without_known(&self, known: &[KnownPair]) -> GroundTruth {
        let skip: HashSet<String> = known.iter().map(|k| fold(&k.source_attr)).collect();
        GroundTruth::new(
            self.pairs
                .iter()
                .filter(|(s, _)| !skip.contains(&fold(s)))
                .cloned(),
        )
        .expect("subset of a valid ground truth")
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct F1Score {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

pub fn f1_from(precision: f64, recall: f64) -> f64 {
    if precision + recall > 0.0 {
        2.0 * precision * recall / (precision + recall)
    } else {
        0.0
    }
}

/// Precision/recall/F1 of the Top-1 candidate of every source attribute
/// that appears in the ground truth.
pub fn evaluate_f1(suggestions: &[Suggestion], truth: &GroundTruth) -> Result<F1Score> {
    if truth.is_empty() {
        return Err(Error::EmptyGroundTruth);
    }
    let mut predicted = 0usize;
    let mut correct = 0usize;
    for s in suggestions {
        let Some(expected) = truth.dest_for(&s.source_attr) else {
            continue;
        };
        let Some(top) = s.top() else { continue };
        predicted += 1;
        if fold(&top.dest_attr) == fold(expected) {
            correct += 1;
        }
    }
    let precision = if predicted == 0 {
        0.0
    } else {
        correct as f64 / predicted as f64
    };
    let recall = correct as f64 / truth.len() as f64;
    Ok(F1Score {
        precision,
        recall,
        f1: f1_from(precision, recall),
    })
}

/// Fraction of truth pairs whose destination is within the first `n` candidates.
pub fn topn_accuracy(suggestions: &[Suggestion], truth: &GroundTruth, n: usize) -> f64 {
    if truth.is_empty() {
        return 0.0;
    }
    let by_source: HashMap<String, &Suggestion> = suggestions
        .iter()
        .map(|s| (fold(&s.source_attr), s))
        .collect();
    let hits = truth
        .pairs()
        .iter()
        .filter(|(s, d)| {
            by_source
                .get(&fold(s))
                .and_then(|sugg| sugg.rank_of(d))
                .is_some_and(|r| r <= n)
        })
        .count();
    hits as f64 / truth.len() as f64
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub topn_accuracy: BTreeMap<usize, f64>,
    /// Milliseconds per enabled matcher plus `total`.
    pub timings: BTreeMap<String, f64>,
}

impl EvalReport {
    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// Copy of `matrix` with final scores recomputed under `weights`.
pub fn project(matrix: &ScoreMatrix, weights: [f64; 4]) -> ScoreMatrix {
    let mut out = matrix.clone();
    for p in &mut out.pairs {
        p.final_score = p.combined(&weights);
    }
    out
}

fn ms(d: std::time::Duration) -> f64 {
    d.as_secs_f64() * 1e3
}

/// Scores the pair of datasets and records milliseconds per enabled
/// matcher (non-zero weight) and in total.
pub fn time_matchers(
    source: &Dataset,
    dest: &Dataset,
    rules: &RuleSet,
    known: &[KnownPair],
    cfg: &MatcherConfig,
) -> Result<(ScoreMatrix, BTreeMap<String, f64>)> {
    let start = Instant::now();
    let mut scorer = Scorer::new(source, dest, rules, cfg)?;
    let matrix = scorer.score(known)?;
    let total = start.elapsed();
    let mut timings = enabled_timings(&scorer.timings(), &cfg.weights);
    timings.insert("total".into(), ms(total));
    Ok((matrix, timings))
}

/// Milliseconds for each component with a non-zero weight, plus `total` as their sum.
pub fn enabled_timings(t: &ComponentTimings, weights: &[f64; 4]) -> BTreeMap<String, f64> {
    let mut out: BTreeMap<String, f64> = COMPONENTS
        .iter()
        .zip(weights)
        .filter(|(_, w)| **w > 0.0)
        .map(|(name, _)| (name.to_string(), ms(t.get(name).expect("known component"))))
        .collect();
    let total = out.values().sum();
    out.insert("total".into(), total);
    out
}

/// Full evaluation: F1 on Top-1, Top-1..4 accuracy and timings. Known pairs
/// are excluded from both the candidates and the ground truth.
pub fn evaluate(
    source: &Dataset,
    dest: &Dataset,
    rules: &RuleSet,
    known: &[KnownPair],
    truth: &GroundTruth,
    cfg: &MatcherConfig,
) -> Result<EvalReport> {
    truth.validate(source, dest)?;
    for k in known {
        k.validate(source, dest)?;
    }
    let (matrix, timings) = time_matchers(source, dest, rules, known, cfg)?;
    let truth = truth.without_known(known);
    let suggestions = rank_excluding(&matrix, MAX_TOP_N.max(cfg.top_n), &Exclusions::from_known(known));
    let f1 = evaluate_f1(&suggestions, &truth)?;
    Ok(EvalReport {
        precision: f1.precision,
        recall: f1.recall,
        f1: f1.f1,
        topn_accuracy: (1..=MAX_TOP_N)
            .map(|n| (n, topn_accuracy(&suggestions, &truth, n)))
            .collect(),
        timings,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AblationRow {
    pub dataset: String,
    pub component: String,
    pub variant: String,
    pub top_n: usize,
    pub accuracy: f64,
}

/// Picks the pivot for the known-pair mode: the given pairs, or one truth
/// pair drawn with the config seed.
pub fn known_pivots(truth: &GroundTruth, known: &[KnownPair], seed: u64) -> Vec<KnownPair> {
    if !known.is_empty() || truth.is_empty() {
        return known.to_vec();
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (s, d) = &truth.pairs()[rng.random_range(0..truth.len())];
    vec![KnownPair::user(s.clone(), d.clone())]
}

/// Top-1..4 accuracy of each matcher used alone. Domain knowledge is left
/// out. The multivariate matcher is run both from a random pivot and from a
/// true known pivot; every row is evaluated on the same truth subset.
pub fn ablation(
    source: &Dataset,
    dest: &Dataset,
    truth: &GroundTruth,
    known: &[KnownPair],
    cfg: &MatcherConfig,
) -> Result<Vec<AblationRow>> {
    truth.validate(source, dest)?;
    let pivots = known_pivots(truth, known, cfg.seed);
    let eval_truth = truth.without_known(&pivots);
    let mut scorer = Scorer::new(source, dest, &RuleSet::empty(), cfg)?;
    let random = scorer.score(&[])?;
    let with_known = scorer.score(&pivots)?;

    let runs: [(&str, &str, Vec<Suggestion>); 4] = [
        ("linguistic", "-", rank(&project(&random, [0., 1., 0., 0.]), MAX_TOP_N)),
        ("univariate", "-", rank(&project(&random, [0., 0., 1., 0.]), MAX_TOP_N)),
        (
            "multivariate",
            "random_pivot",
            rank(&project(&random, [0., 0., 0., 1.]), MAX_TOP_N),
        ),
        (
            "multivariate",
            "known_pivot",
            rank_excluding(
                &project(&with_known, [0., 0., 0., 1.]),
                MAX_TOP_N,
                &Exclusions::from_known(&pivots),
            ),
        ),
    ];
    let mut rows = Vec::new();
    for (component, variant, suggestions) in &runs {
        for n in 1..=MAX_TOP_N {
            rows.push(AblationRow {
                dataset: source.name().to_string(),
                component: component.to_string(),
                variant: variant.to_string(),
                top_n: n,
                accuracy: topn_accuracy(suggestions, &eval_truth, n),
            });
        }
    }
    Ok(rows)
}

pub fn write_ablation_csv<W: Write>(rows: &[AblationRow], writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    let to_err = |e: csv::Error| Error::MalformedCsv(e.to_string());
    w.write_record(["dataset", "component", "variant", "top_n", "accuracy"])
        .map_err(to_err)?;
    for r in rows {
        w.write_record([
            r.dataset.clone(),
            r.component.clone(),
            r.variant.clone(),
            r.top_n.to_string(),
            r.accuracy.to_string(),
        ])
        .map_err(to_err)?;
    }
    w.flush().map_err(|e| Error::io("<csv writer>", e))?;
    Ok(())
}
