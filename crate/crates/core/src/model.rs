//! Shared data model: datasets, attributes, configuration and the score matrix.

use std::collections::HashMap;
use std::io::Write;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::ingest::tokenize;

/// Tolerance used when checking that a weight vector sums to one.
pub const WEIGHT_SUM_TOLERANCE: f64 = 1e-9;

/// Case-folded canonical form used for every name and value comparison.
pub fn fold(s: &str) -> String {
    s.to_lowercase()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AttributeKind {
    Numeric,
    Categorical,
}

/// Column values. Missing cells are `None`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "values", rename_all = "lowercase")]
pub enum Values {
    Numeric(Vec<Option<f64>>),
    Categorical(Vec<Option<String>>),
}

impl Values {
    pub fn len(&self) -> usize {
        match self {
            Values::Numeric(v) => v.len(),
            Values::Categorical(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn is_null(&self, row: usize) -> bool {
        match self {
            Values::Numeric(v) => v[row].is_none(),
            Values::Categorical(v) => v[row].is_none(),
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
struct AttributeRepr {
    name: String,
    #[serde(flatten)]
    values: Values,
}

/// A named column with its inferred kind and name tokens.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(from = "AttributeRepr", into = "AttributeRepr")]
pub struct Attribute {
    name: String,
    values: Values,
    tokens: Vec<String>,
}

impl From<AttributeRepr> for Attribute {
    fn from(repr: AttributeRepr) -> Self {
        Attribute::new(repr.name, repr.values)
    }
}

impl From<Attribute> for AttributeRepr {
    fn from(attr: Attribute) -> Self {
        AttributeRepr {
            name: attr.name,
            values: attr.values,
        }
    }
}

impl Attribute {
    /// Builds an attribute. Non-finite numeric cells are stored as nulls.
    pub fn new(name: impl Into<String>, values: Values) -> Self {
        let name = name.into();
        let values = match values {
            Values::Numeric(v) => {
                Values::Numeric(v.into_iter().map(|x| x.filter(|x| x.is_finite())).collect())
            }
            other => other,
        };
        let tokens = tokenize(&name);
        Attribute {
            name,
            values,
            tokens,
        }
    }

    pub fn numeric(name: impl Into<String>, values: Vec<Option<f64>>) -> Self {
        Self::new(name, Values::Numeric(values))
    }

    pub fn categorical(name: impl Into<String>, values: Vec<Option<String>>) -> Self {
        Self::new(name, Values::Categorical(values))
    }

    /// Convenience constructor for fully populated numeric columns.
    pub fn from_f64s(name: impl Into<String>, values: &[f64]) -> Self {
        Self::numeric(name, values.iter().copied().map(Some).collect())
    }

    /// Convenience constructor for fully populated categorical columns.
    pub fn from_strs(name: impl Into<String>, values: &[&str]) -> Self {
        Self::categorical(name, values.iter().map(|s| Some(s.to_string())).collect())
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn kind(&self) -> AttributeKind {
        match self.values {
            Values::Numeric(_) => AttributeKind::Numeric,
            Values::Categorical(_) => AttributeKind::Categorical,
        }
    }

    pub fn values(&self) -> &Values {
        &self.values
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn non_null_count(&self) -> usize {
        (0..self.len()).filter(|&i| !self.values.is_null(i)).count()
    }

    pub fn numeric_values(&self) -> Option<&[Option<f64>]> {
        match &self.values {
            Values::Numeric(v) => Some(v),
            Values::Categorical(_) => None,
        }
    }

    pub fn categorical_values(&self) -> Option<&[Option<String>]> {
        match &self.values {
            Values::Categorical(v) => Some(v),
            Values::Numeric(_) => None,
        }
    }

    /// Returns a copy with rows reordered by `order` (`order[i]` is the old row index).
    pub fn permuted(&self, order: &[usize]) -> Attribute {
        let values = match &self.values {
            Values::Numeric(v) => Values::Numeric(order.iter().map(|&i| v[i]).collect()),
            Values::Categorical(v) => {
                Values::Categorical(order.iter().map(|&i| v[i].clone()).collect())
            }
        };
        Attribute {
            name: self.name.clone(),
            values,
            tokens: self.tokens.clone(),
        }
    }

    pub fn renamed(&self, name: impl Into<String>) -> Attribute {
        Attribute::new(name, self.values.clone())
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
struct DatasetRepr {
    name: String,
    attributes: Vec<Attribute>,
}

/// A named table of aligned attributes.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(try_from = "DatasetRepr", into = "DatasetRepr")]
pub struct Dataset {
    name: String,
    attributes: Vec<Attribute>,
    row_count: usize,
    index: HashMap<String, usize>,
}

impl PartialEq for Dataset {
    fn eq(&self, other: &Self) -> bool {
        self.name == other.name
            && self.row_count == other.row_count
            && self.attributes == other.attributes
    }
}

impl TryFrom<DatasetRepr> for Dataset {
    type Error = Error;

    fn try_from(repr: DatasetRepr) -> Result<Self> {
        Dataset::new(repr.name, repr.attributes)
    }
}

impl From<Dataset> for DatasetRepr {
    fn from(ds: Dataset) -> Self {
        DatasetRepr {
            name: ds.name,
            attributes: ds.attributes,
        }
    }
}

impl Dataset {
    /// Builds a dataset, checking that every attribute has the same row count
    /// and that names are unique after case folding.
    pub fn new(name: impl Into<String>, attributes: Vec<Attribute>) -> Result<Self> {
        let row_count = attributes.first().map_or(0, Attribute::len);
        let mut index = HashMap::with_capacity(attributes.len());
        for (i, attr) in attributes.iter().enumerate() {
            if attr.len() != row_count {
                return Err(Error::RaggedAttribute {
                    name: attr.name.clone(),
                    got: attr.len(),
                    expected: row_count,
                });
            }
            if index.insert(fold(&attr.name), i).is_some() {
                return Err(Error::DuplicateHeader(attr.name.clone()));
            }
        }
        Ok(Dataset {
            name: name.into(),
            attributes,
            row_count,
            index,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn attributes(&self) -> &[Attribute] {
        &self.attributes
    }

    pub fn row_count(&self) -> usize {
        self.row_count
    }

    pub fn len(&self) -> usize {
        self.attributes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.attributes.is_empty()
    }

    /// Case-insensitive index lookup.
    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.index.get(&fold(name)).copied()
    }

    pub fn attribute(&self, name: &str) -> Option<&Attribute> {
        self.index_of(name).map(|i| &self.attributes[i])
    }

    pub fn require(&self, name: &str) -> Result<&Attribute> {
        self.attribute(name)
            .ok_or_else(|| Error::UnknownAttribute(name.to_string()))
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.attributes.iter().map(Attribute::name)
    }

    /// Reorders rows of every attribute together.
    pub fn permute_rows(&self, order: &[usize]) -> Result<Dataset> {
        assert_eq!(order.len(), self.row_count, "row permutation length");
        Dataset::new(
            self.name.clone(),
            self.attributes.iter().map(|a| a.permuted(order)).collect(),
        )
    }
}

fn check_weights(which: &'static str, w: &[f64]) -> Result<()> {
    if w.iter().any(|x| !x.is_finite() || *x < 0.0) {
        return Err(Error::NegativeWeight { which });
    }
    let sum: f64 = w.iter().sum();
    if (sum - 1.0).abs() > WEIGHT_SUM_TOLERANCE {
        return Err(Error::WeightSum { which, sum });
    }
    Ok(())
}

/// Weights and parameters for one scoring run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MatcherConfig {
    /// Levenshtein, Monge-Elkan and TF-IDF weights inside the linguistic score.
    pub ling_weights: [f64; 3],
    /// Domain-knowledge, linguistic, univariate and multivariate weights.
    pub weights: [f64; 4],
    pub top_n: usize,
    /// Equal-width bin count used when a numeric column meets a categorical one.
    pub bins: usize,
    /// Seed for the random pivot used when no known pairs exist.
    pub seed: u64,
}

impl Default for MatcherConfig {
    fn default() -> Self {
        MatcherConfig {
            ling_weights: [1.0 / 3.0; 3],
            weights: [0.25; 4],
            top_n: 1,
            bins: 5,
            seed: 0,
        }
    }
}

impl MatcherConfig {
    pub fn validate(&self) -> Result<()> {
        check_weights("linguistic", &self.ling_weights)?;
        check_weights("ensemble", &self.weights)?;
        if self.top_n < 1 {
            return Err(Error::NonPositiveParam {
                name: "top_n",
                value: self.top_n as u64,
            });
        }
        if self.bins < 2 {
            return Err(Error::NonPositiveParam {
                name: "bins",
                value: self.bins as u64,
            });
        }
        Ok(())
    }

    /// Same config with ensemble weights replaced.
    pub fn with_weights(&self, weights: [f64; 4]) -> Self {
        MatcherConfig {
            weights,
            ..self.clone()
        }
    }
}

/// Free-function form of [`MatcherConfig::validate`].
pub fn validate_config(cfg: &MatcherConfig) -> Result<()> {
    cfg.validate()
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PairOrigin {
    #[default]
    User,
    Rule,
    RandomPivot,
}

/// A source/destination correspondence taken as given.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct KnownPair {
    pub source_attr: String,
    pub dest_attr: String,
    #[serde(default)]
    pub origin: PairOrigin,
}

impl KnownPair {
    pub fn user(source_attr: impl Into<String>, dest_attr: impl Into<String>) -> Self {
        KnownPair {
            source_attr: source_attr.into(),
            dest_attr: dest_attr.into(),
            origin: PairOrigin::User,
        }
    }

    pub fn validate(&self, source: &Dataset, dest: &Dataset) -> Result<()> {
        source.require(&self.source_attr)?;
        dest.require(&self.dest_attr)?;
        Ok(())
    }
}

/// Component and combined scores for one attribute pair.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairScore {
    pub source_attr: String,
    pub dest_attr: String,
    pub dk: f64,
    pub lin: f64,
    pub uni: f64,
    pub mul: f64,
    #[serde(rename = "final")]
    pub final_score: f64,
}

impl PairScore {
    pub fn components(&self) -> [f64; 4] {
        [self.dk, self.lin, self.uni, self.mul]
    }

    pub fn combined(&self, weights: &[f64; 4]) -> f64 {
        self.components()
            .iter()
            .zip(weights)
            .map(|(c, w)| c * w)
            .sum()
    }
}

/// Every source x destination pair score, row-major by source attribute.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScoreMatrix {
    pub source_attrs: Vec<String>,
    pub dest_attrs: Vec<String>,
    pub pairs: Vec<PairScore>,
    pub config_fingerprint: String,
    /// Pivots that fed the multivariate matcher, including a random pivot when one was drawn.
    pub pivots: Vec<KnownPair>,
}

impl ScoreMatrix {
    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn row(&self, source_index: usize) -> &[PairScore] {
        let n = self.dest_attrs.len();
        &self.pairs[source_index * n..(source_index + 1) * n]
    }

    pub fn get(&self, source_attr: &str, dest_attr: &str) -> Option<&PairScore> {
        let s = fold(source_attr);
        let d = fold(dest_attr);
        let i = self.source_attrs.iter().position(|a| fold(a) == s)?;
        let j = self.dest_attrs.iter().position(|a| fold(a) == d)?;
        self.pairs.get(i * self.dest_attrs.len() + j)
    }

    pub const CSV_HEADER: [&'static str; 7] =
        ["source_attr", "dest_attr", "dk", "lin", "uni", "mul", "final"];

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        let to_err = |e: csv::Error| Error::MalformedCsv(e.to_string());
        w.write_record(Self::CSV_HEADER).map_err(to_err)?;
        for p in &self.pairs {
            w.write_record([
                p.source_attr.clone(),
                p.dest_attr.clone(),
                p.dk.to_string(),
                p.lin.to_string(),
                p.uni.to_string(),
                p.mul.to_string(),
                p.final_score.to_string(),
            ])
            .map_err(to_err)?;
        }
        w.flush().map_err(|e| Error::io("<csv writer>", e))?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("csv output is utf-8")
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(self).expect("score matrix serializes")
    }
}

/// Stable hash of a configuration together with its known pairs.
pub fn config_fingerprint(cfg: &MatcherConfig, known: &[KnownPair]) -> String {
    let payload = serde_json::to_vec(&(cfg, known)).expect("config serializes");
    let digest = Sha256::digest(&payload);
    digest.iter().map(|b| format!("{b:02x}")).collect()
}
