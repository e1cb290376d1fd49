//! Weighted ensemble of the four matchers and Top-N ranking.

use std::collections::HashSet;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::instance::{MultivariateMatcher, UniProfile, uni_score_profiles};
use crate::model::{
    Dataset, KnownPair, MatcherConfig, PairOrigin, PairScore, ScoreMatrix, config_fingerprint, fold,
};
use crate::schema::{RuleSet, TfidfCorpus, build_tfidf, dk_score, lin_score};

/// Matcher component names, in weight order.
pub const COMPONENTS: [&str; 4] = ["dk", "lin", "uni", "mul"];

/// Wall-clock time spent in each component.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct ComponentTimings {
    pub dk: Duration,
    pub lin: Duration,
    pub uni: Duration,
    pub mul: Duration,
}

impl ComponentTimings {
    pub fn get(&self, component: &str) -> Option<Duration> {
        match component {
            "dk" => Some(self.dk),
            "lin" => Some(self.lin),
            "uni" => Some(self.uni),
            "mul" => Some(self.mul),
            _ => None,
        }
    }
}

/// Precomputed scoring state for one source/destination pair of datasets.
///
/// The domain-knowledge, linguistic and univariate components depend only on
/// the datasets, rules and config, so they are computed once here. The
/// multivariate component depends on the known pairs and is recomputed by
/// [`Scorer::score`].
#[derive(Clone, Debug)]
pub struct Scorer {
    cfg: MatcherConfig,
    source_attrs: Vec<String>,
    dest_attrs: Vec<String>,
    /// (dk, lin, uni) row-major by source attribute.
    fixed: Vec<[f64; 3]>,
    multivariate: MultivariateMatcher,
    corpus: TfidfCorpus,
    timings: ComponentTimings,
}

impl Scorer {
    pub fn new(source: &Dataset, dest: &Dataset, rules: &RuleSet, cfg: &MatcherConfig) -> Result<Self> {
        cfg.validate()?;
        let corpus_start = Instant::now();
        let corpus = build_tfidf(source, dest)?;
        let corpus_time = corpus_start.elapsed();

        let source_attrs: Vec<String> = source.names().map(str::to_string).collect();
        let dest_attrs: Vec<String> = dest.names().map(str::to_string).collect();
        let n = source_attrs.len() * dest_attrs.len();
        let mut fixed = vec![[0.0; 3]; n];
        let mut timings = ComponentTimings::default();

        let t = Instant::now();
        if !rules.is_empty() {
            for (i, s) in source_attrs.iter().enumerate() {
                for (j, d) in dest_attrs.iter().enumerate() {
                    fixed[i * dest_attrs.len() + j][0] = dk_score(s, d, rules);
                }
            }
        }
        timings.dk = t.elapsed();

        let t = Instant::now();
        for (i, s) in source_attrs.iter().enumerate() {
            for (j, d) in dest_attrs.iter().enumerate() {
                fixed[i * dest_attrs.len() + j][1] = lin_score(s, d, &corpus, &cfg.ling_weights)?;
            }
        }
        timings.lin = t.elapsed() + corpus_time;

        let t = Instant::now();
        let src_profiles: Vec<UniProfile> = source
            .attributes()
            .iter()
            .map(|a| UniProfile::new(a, cfg.bins))
            .collect();
        let dst_profiles: Vec<UniProfile> = dest
            .attributes()
            .iter()
            .map(|a| UniProfile::new(a, cfg.bins))
            .collect();
        for (i, sp) in src_profiles.iter().enumerate() {
            for (j, dp) in dst_profiles.iter().enumerate() {
                let uni = match uni_score_profiles(sp, dp) {
                    Ok(v) => v,
                    // an all-null column shares nothing with anything
                    Err(Error::EmptyAttribute(_)) => 0.0,
                    Err(e) => return Err(e),
                };
                fixed[i * dest_attrs.len() + j][2] = uni;
            }
        }
        timings.uni = t.elapsed();

        let t = Instant::now();
        let multivariate = MultivariateMatcher::new(source, dest);
        timings.mul = t.elapsed();

        Ok(Scorer {
            cfg: cfg.clone(),
            source_attrs,
            dest_attrs,
            fixed,
            multivariate,
            corpus,
            timings,
        })
    }

    pub fn config(&self) -> &MatcherConfig {
        &self.cfg
    }

    pub fn corpus(&self) -> &TfidfCorpus {
        &self.corpus
    }

    /// Time spent so far per component (construction plus the last `score` call).
    pub fn timings(&self) -> ComponentTimings {
        self.timings
    }

    /// Computes multivariate scores for `known` and assembles the full matrix.
    pub fn score(&mut self, known: &[KnownPair]) -> Result<ScoreMatrix> {
        let t = Instant::now();
        let mul = self.multivariate.score(known, self.cfg.seed)?;
        let w = self.cfg.weights;
        let nd = self.dest_attrs.len();
        let mut pairs = Vec::with_capacity(self.fixed.len());
        for (i, s) in self.source_attrs.iter().enumerate() {
            for (j, d) in self.dest_attrs.iter().enumerate() {
                let [dk, lin, uni] = self.fixed[i * nd + j];
                let mul = mul.scores.get(&(s.clone(), d.clone())).copied().unwrap_or(0.0);
                let final_score = w[0] * dk + w[1] * lin + w[2] * uni + w[3] * mul;
                pairs.push(PairScore {
                    source_attr: s.clone(),
                    dest_attr: d.clone(),
                    dk,
                    lin,
                    uni,
                    mul,
                    final_score,
                });
            }
        }
        let mul_time = t.elapsed();
        self.timings.mul = mul_time;
        Ok(ScoreMatrix {
            source_attrs: self.source_attrs.clone(),
            dest_attrs: self.dest_attrs.clone(),
            pairs,
            config_fingerprint: config_fingerprint(&self.cfg, known),
            pivots: mul.pivots,
        })
    }
}

/// Scores every source x destination pair.
pub fn score_all(
    source: &Dataset,
    dest: &Dataset,
    rules: &RuleSet,
    known: &[KnownPair],
    cfg: &MatcherConfig,
) -> Result<ScoreMatrix> {
    for k in known {
        k.validate(source, dest)?;
    }
    Scorer::new(source, dest, rules, cfg)?.score(known)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Candidate {
    pub dest_attr: String,
    pub score: f64,
}

/// Ranked destination candidates for one source attribute.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Suggestion {
    pub source_attr: String,
    pub ranked: Vec<Candidate>,
}

impl Suggestion {
    pub fn top(&self) -> Option<&Candidate> {
        self.ranked.first()
    }

    /// 1-based rank of `dest_attr`, if present.
    pub fn rank_of(&self, dest_attr: &str) -> Option<usize> {
        let d = fold(dest_attr);
        self.ranked.iter().position(|c| fold(&c.dest_attr) == d).map(|p| p + 1)
    }
}

/// Attributes and pairs withheld from ranking. Names are case-folded.
#[derive(Clone, Debug, Default)]
pub struct Exclusions {
    pub sources: HashSet<String>,
    pub dests: HashSet<String>,
    pub pairs: HashSet<(String, String)>,
}

impl Exclusions {
    /// Excludes both sides of every confirmed pair. Random pivots are not
    /// matches and stay rankable.
    pub fn from_known(known: &[KnownPair]) -> Self {
        let mut ex = Exclusions::default();
        for k in known.iter().filter(|k| k.origin != PairOrigin::RandomPivot) {
            ex.sources.insert(fold(&k.source_attr));
            ex.dests.insert(fold(&k.dest_attr));
        }
        ex
    }

    pub fn reject(&mut self, source_attr: &str, dest_attr: &str) {
        self.pairs.insert((fold(source_attr), fold(dest_attr)));
    }
}

/// Per source attribute, the `top_n` destinations by final score (ties by name).
pub fn rank(matrix: &ScoreMatrix, top_n: usize) -> Vec<Suggestion> {
    rank_excluding(matrix, top_n, &Exclusions::default())
}

pub fn rank_excluding(matrix: &ScoreMatrix, top_n: usize, ex: &Exclusions) -> Vec<Suggestion> {
    let mut out = Vec::new();
    for (i, s) in matrix.source_attrs.iter().enumerate() {
        let sf = fold(s);
        if ex.sources.contains(&sf) {
            continue;
        }
        let mut row: Vec<&PairScore> = matrix
            .row(i)
            .iter()
            .filter(|p| {
                let df = fold(&p.dest_attr);
                !ex.dests.contains(&df) && !ex.pairs.contains(&(sf.clone(), df))
            })
            .collect();
        row.sort_by(|a, b| {
            b.final_score
                .total_cmp(&a.final_score)
                .then_with(|| a.dest_attr.cmp(&b.dest_attr))
        });
        out.push(Suggestion {
            source_attr: s.clone(),
            ranked: row
                .into_iter()
                .take(top_n)
                .map(|p| Candidate {
                    dest_attr: p.dest_attr.clone(),
                    score: p.final_score,
                })
                .collect(),
        });
    }
    out
}
