//! Schema-level matchers: domain-knowledge rules and the linguistic ensemble
//! (Levenshtein, Monge-Elkan and TF-IDF over attribute-name tokens).

use std::collections::{BTreeSet, HashMap};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::tokenize;
use crate::model::{Dataset, fold};

/// One attribute-to-attribute correspondence rule. Patterns are case-folded
/// names, optionally containing `*` wildcards.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Rule {
    pub source: String,
    pub dest: String,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Rule>", into = "Vec<Rule>")]
pub struct RuleSet {
    rules: Vec<Rule>,
}

impl TryFrom<Vec<Rule>> for RuleSet {
    type Error = Error;

    fn try_from(rules: Vec<Rule>) -> Result<Self> {
        RuleSet::new(rules)
    }
}

impl From<RuleSet> for Vec<Rule> {
    fn from(rs: RuleSet) -> Self {
        rs.rules
    }
}

impl RuleSet {
    pub fn new(rules: Vec<Rule>) -> Result<Self> {
        for (i, r) in rules.iter().enumerate() {
            if r.source.trim().is_empty() || r.dest.trim().is_empty() {
                return Err(Error::InvalidRule(format!("rule {i} has an empty pattern")));
            }
        }
        let rules = rules
            .into_iter()
            .map(|r| Rule {
                source: fold(&r.source),
                dest: fold(&r.dest),
            })
            .collect();
        Ok(RuleSet { rules })
    }

    pub fn empty() -> Self {
        RuleSet::default()
    }

    /// Parses a JSON array of `{"source": .., "dest": ..}` objects.
    pub fn from_json_str(json: &str) -> Result<Self> {
        Ok(serde_json::from_str(json)?)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json_str(&text)
    }

    pub fn rules(&self) -> &[Rule] {
        &self.rules
    }

    pub fn is_empty(&self) -> bool {
        self.rules.is_empty()
    }
}

/// Wildcard match where `*` matches any (possibly empty) run of characters.
pub fn glob_match(pattern: &str, text: &str) -> bool {
    let p: Vec<char> = pattern.chars().collect();
    let t: Vec<char> = text.chars().collect();
    let (mut pi, mut ti) = (0, 0);
    let mut star: Option<(usize, usize)> = None;
    while ti < t.len() {
        if pi < p.len() && p[pi] != '*' && p[pi] == t[ti] {
            pi += 1;
            ti += 1;
        } else if pi < p.len() && p[pi] == '*' {
            star = Some((pi, ti));
            pi += 1;
        } else if let Some((sp, st)) = star {
            pi = sp + 1;
            ti = st + 1;
            star = Some((sp, st + 1));
        } else {
            return false;
        }
    }
    p[pi..].iter().all(|&c| c == '*')
}

/// Domain-knowledge score: 1 when a rule links the pair in either direction.
pub fn dk_score(source_attr: &str, dest_attr: &str, rules: &RuleSet) -> f64 {
    let s = fold(source_attr);
    let d = fold(dest_attr);
    let hit = rules.rules.iter().any(|r| {
        (glob_match(&r.source, &s) && glob_match(&r.dest, &d))
            || (glob_match(&r.source, &d) && glob_match(&r.dest, &s))
    });
    if hit { 1.0 } else { 0.0 }
}

fn folded_chars(s: &str) -> Vec<char> {
    s.chars().flat_map(char::to_lowercase).collect()
}

fn levenshtein<T: PartialEq>(a: &[T], b: &[T]) -> usize {
    if a.is_empty() {
        return b.len();
    }
    if b.is_empty() {
        return a.len();
    }
    if b.len() < SHORT {
        let mut row = [0usize; SHORT];
        levenshtein_rows(a, b, &mut row[..=b.len()])
    } else {
        levenshtein_rows(a, b, &mut vec![0; b.len() + 1])
    }
}

/// Single-row Wagner-Fischer; `row` has `b.len() + 1` slots.
fn levenshtein_rows<T: PartialEq>(a: &[T], b: &[T], row: &mut [usize]) -> usize {
    for (j, r) in row.iter_mut().enumerate() {
        *r = j;
    }
    for (i, ca) in a.iter().enumerate() {
        let mut diag = row[0];
        row[0] = i + 1;
        for (j, cb) in b.iter().enumerate() {
            let next = (diag + usize::from(ca != cb)).min(row[j + 1] + 1).min(row[j] + 1);
            diag = row[j + 1];
            row[j + 1] = next;
        }
    }
    row[b.len()]
}

const SHORT: usize = 64;

fn ascii_folded(s: &str, buf: &mut [u8; SHORT]) -> Option<usize> {
    if !s.is_ascii() || s.len() > SHORT {
        return None;
    }
    for (d, c) in buf.iter_mut().zip(s.bytes()) {
        *d = c.to_ascii_lowercase();
    }
    Some(s.len())
}

fn folded_distance(a: &str, b: &str) -> (usize, usize) {
    let (mut ba, mut bb) = ([0u8; SHORT], [0u8; SHORT]);
    if let (Some(la), Some(lb)) = (ascii_folded(a, &mut ba), ascii_folded(b, &mut bb)) {
        return (levenshtein(&ba[..la], &bb[..lb]), la.max(lb));
    }
    let (ca, cb) = (folded_chars(a), folded_chars(b));
    (levenshtein(&ca, &cb), ca.len().max(cb.len()))
}

/// Unit-cost Levenshtein distance over case-folded characters.
pub fn edit_distance(a: &str, b: &str) -> usize {
    folded_distance(a, b).0
}

/// `1 - distance / max_len`; two empty strings are identical.
pub fn sim_lev(a: &str, b: &str) -> f64 {
    let (d, longest) = folded_distance(a, b);
    if longest == 0 {
        return 1.0;
    }
    1.0 - d as f64 / longest as f64
}

/// Monge-Elkan similarity: for each token of `a`, the best Levenshtein
/// similarity against any token of `b`, averaged over `a`'s tokens.
/// Not symmetric.
pub fn sim_monge_elkan(a: &str, b: &str) -> f64 {
    monge_elkan_tokens(&tokenize(a), &tokenize(b))
}

pub fn monge_elkan_tokens(a: &[String], b: &[String]) -> f64 {
    if a.is_empty() {
        return 0.0;
    }
    let total: f64 = a
        .iter()
        .map(|ta| b.iter().map(|tb| sim_lev(ta, tb)).fold(0.0, f64::max))
        .sum();
    total / a.len() as f64
}

/// Per-document TF-IDF token scores where every attribute name of both
/// datasets is one document. Scores are min-max normalized to `[0, 1]` over
/// the whole corpus.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct TfidfCorpus {
    documents: Vec<Vec<String>>,
    scores: HashMap<String, HashMap<String, f64>>,
}

impl TfidfCorpus {
    /// Builds the corpus from raw attribute names.
    pub fn from_documents<'a>(names: impl IntoIterator<Item = &'a str>) -> Self {
        let docs: Vec<(String, Vec<String>)> = names
            .into_iter()
            .map(|n| (fold(n), tokenize(n)))
            .collect();
        let n_docs = docs.len() as f64;
        let mut df: HashMap<&str, usize> = HashMap::new();
        for (_, tokens) in &docs {
            let distinct: BTreeSet<&str> = tokens.iter().map(String::as_str).collect();
            for t in distinct {
                *df.entry(t).or_default() += 1;
            }
        }

        let mut raw: HashMap<String, HashMap<String, f64>> = HashMap::new();
        for (name, tokens) in &docs {
            if raw.contains_key(name) {
                continue;
            }
            let mut counts: HashMap<&str, usize> = HashMap::new();
            for t in tokens {
                *counts.entry(t).or_default() += 1;
            }
            let len = tokens.len() as f64;
            let entry = counts
                .into_iter()
                .map(|(t, c)| {
                    let idf = ((1.0 + n_docs) / (1.0 + df[t] as f64)).ln() + 1.0;
                    (t.to_string(), c as f64 / len * idf)
                })
                .collect();
            raw.insert(name.clone(), entry);
        }

        let all = raw.values().flat_map(|m| m.values().copied());
        let (min, max) = all.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), x| {
            (lo.min(x), hi.max(x))
        });
        let span = max - min;
        let degenerate = !span.is_finite() || span <= f64::EPSILON * max.abs();
        for m in raw.values_mut() {
            for v in m.values_mut() {
                *v = if degenerate { 1.0 } else { (*v - min) / span };
            }
        }

        TfidfCorpus {
            documents: docs.into_iter().map(|(_, t)| t).collect(),
            scores: raw,
        }
    }

    /// Corpus with explicit per-document token scores, bypassing TF-IDF.
    pub fn from_scores<N, T>(scores: impl IntoIterator<Item = (N, Vec<(T, f64)>)>) -> Self
    where
        N: AsRef<str>,
        T: AsRef<str>,
    {
        let mut documents = Vec::new();
        let mut map = HashMap::new();
        for (name, tokens) in scores {
            documents.push(tokenize(name.as_ref()));
            map.insert(
                fold(name.as_ref()),
                tokens
                    .into_iter()
                    .map(|(t, s)| (fold(t.as_ref()), s))
                    .collect(),
            );
        }
        TfidfCorpus {
            documents,
            scores: map,
        }
    }

    pub fn document_count(&self) -> usize {
        self.documents.len()
    }

    pub fn contains(&self, attr: &str) -> bool {
        self.scores.contains_key(&fold(attr))
    }

    /// Normalized score of `token` in `attr`'s document; 0 when absent.
    pub fn token_score(&self, token: &str, attr: &str) -> Option<f64> {
        self.scores
            .get(&fold(attr))
            .map(|m| m.get(&fold(token)).copied().unwrap_or(0.0))
    }

    pub fn scores(&self) -> impl Iterator<Item = (&str, &str, f64)> {
        self.scores
            .iter()
            .flat_map(|(d, m)| m.iter().map(move |(t, s)| (d.as_str(), t.as_str(), *s)))
    }
}

/// Builds a TF-IDF corpus over the attribute names of both datasets.
pub fn build_tfidf(source: &Dataset, dest: &Dataset) -> Result<TfidfCorpus> {
    for ds in [source, dest] {
        if ds.is_empty() {
            return Err(Error::EmptyDataset(ds.name().to_string()));
        }
    }
    Ok(TfidfCorpus::from_documents(source.names().chain(dest.names())))
}

/// TF-IDF similarity: product over both attributes of their score mass on the
/// shared tokens, divided by the product of their mass on the token union.
pub fn sim_tfidf(a: &str, b: &str, corpus: &TfidfCorpus) -> Result<f64> {
    let sa = corpus
        .scores
        .get(&fold(a))
        .ok_or_else(|| Error::UnknownAttribute(a.to_string()))?;
    let sb = corpus
        .scores
        .get(&fold(b))
        .ok_or_else(|| Error::UnknownAttribute(b.to_string()))?;
    let ta: BTreeSet<String> = tokenize(a).into_iter().collect();
    let tb: BTreeSet<String> = tokenize(b).into_iter().collect();
    if !ta.is_empty() && ta == tb {
        return Ok(1.0);
    }
    let mass = |scores: &HashMap<String, f64>, tokens: &mut dyn Iterator<Item = &String>| -> f64 {
        tokens.map(|t| scores.get(t).copied().unwrap_or(0.0)).sum()
    };
    let cap_a = mass(sa, &mut ta.intersection(&tb));
    let cap_b = mass(sb, &mut ta.intersection(&tb));
    let cup_a = mass(sa, &mut ta.union(&tb));
    let cup_b = mass(sb, &mut ta.union(&tb));
    let denom = cup_a * cup_b;
    if cup_a <= 0.0 || cup_b <= 0.0 {
        return Ok(0.0);
    }
    Ok((cap_a * cap_b / denom).clamp(0.0, 1.0))
}

/// Linguistic score: weighted sum of Levenshtein, Monge-Elkan and TF-IDF.
pub fn lin_score(source_attr: &str, dest_attr: &str, corpus: &TfidfCorpus, g: &[f64; 3]) -> Result<f64> {
    let lev = sim_lev(source_attr, dest_attr);
    let me = sim_monge_elkan(source_attr, dest_attr);
    let tfidf = sim_tfidf(source_attr, dest_attr, corpus)?;
    Ok((g[0] * lev + g[1] * me + g[2] * tfidf).clamp(0.0, 1.0))
}
