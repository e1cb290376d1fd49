//! Instance-level matchers.
//!
//! The univariate matcher compares value distributions of a single pair
//! (mean/SD for numeric columns, Jaccard over distinct values otherwise). The
//! multivariate matcher anchors on known matched pairs: it ranks every other
//! attribute by its Pearson correlation with the pivot inside its own dataset
//! and scores a cross pair by how closely the two correlations mirror each
//! other.

use std::collections::{BTreeMap, HashMap, HashSet};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::{bin_index, bin_label};
use crate::model::{Attribute, Dataset, KnownPair, PairOrigin, Values, fold};

/// Weight of the mean gap in the numeric univariate score; the SD gap gets the rest.
pub const MEAN_WEIGHT: f64 = 0.8;
pub const SD_WEIGHT: f64 = 0.2;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StatsSummary {
    pub mean: f64,
    /// Population standard deviation.
    pub sd: f64,
    pub n: usize,
}

fn summarize(values: &[Option<f64>]) -> Option<StatsSummary> {
    let (sum, n) = values
        .iter()
        .flatten()
        .fold((0.0, 0usize), |(s, n), x| (s + x, n + 1));
    if n == 0 {
        return None;
    }
    let mean = sum / n as f64;
    let var = values.iter().flatten().map(|x| (x - mean).powi(2)).sum::<f64>() / n as f64;
    Some(StatsSummary {
        mean,
        sd: var.sqrt(),
        n,
    })
}

/// Mean and population SD over a numeric attribute's non-null values.
pub fn stats(attr: &Attribute) -> Result<StatsSummary> {
    let values = attr
        .numeric_values()
        .ok_or_else(|| Error::NotNumeric(attr.name().to_string()))?;
    summarize(values).ok_or_else(|| Error::EmptyAttribute(attr.name().to_string()))
}

/// Precomputed per-attribute data for the univariate matcher.
#[derive(Clone, Debug)]
pub enum UniProfile {
    Numeric {
        name: String,
        stats: Option<StatsSummary>,
        /// Distinct equal-width bin labels, used against categorical columns.
        bins: HashSet<String>,
    },
    Categorical {
        name: String,
        distinct: HashSet<String>,
    },
}

impl UniProfile {
    pub fn new(attr: &Attribute, bins: usize) -> Self {
        match attr.values() {
            Values::Numeric(v) => {
                let stats = summarize(v);
                let (lo, hi) = v.iter().flatten().fold(
                    (f64::INFINITY, f64::NEG_INFINITY),
                    |(lo, hi), &x| (lo.min(x), hi.max(x)),
                );
                let labels = v
                    .iter()
                    .flatten()
                    .map(|&x| bin_index(x, lo, hi, bins))
                    .collect::<HashSet<_>>()
                    .into_iter()
                    .map(bin_label)
                    .collect();
                UniProfile::Numeric {
                    name: attr.name().to_string(),
                    stats,
                    bins: labels,
                }
            }
            Values::Categorical(v) => UniProfile::Categorical {
                name: attr.name().to_string(),
                distinct: v.iter().flatten().map(|s| fold(s)).collect(),
            },
        }
    }

    fn name(&self) -> &str {
        match self {
            UniProfile::Numeric { name, .. } | UniProfile::Categorical { name, .. } => name,
        }
    }

    fn value_set(&self) -> Result<&HashSet<String>> {
        let set = match self {
            UniProfile::Numeric { bins, .. } => bins,
            UniProfile::Categorical { distinct, .. } => distinct,
        };
        if set.is_empty() {
            return Err(Error::EmptyAttribute(self.name().to_string()));
        }
        Ok(set)
    }
}

fn ratio_or_zero(num: f64, denom: f64) -> f64 {
    if denom == 0.0 { 0.0 } else { num / denom }
}

pub fn numeric_similarity(a: &StatsSummary, b: &StatsSummary) -> f64 {
    let mean_gap = ratio_or_zero((a.mean - b.mean).abs(), a.mean.abs().max(b.mean.abs()));
    let sd_gap = ratio_or_zero((a.sd - b.sd).abs(), a.sd.max(b.sd));
    (1.0 - (MEAN_WEIGHT * mean_gap + SD_WEIGHT * sd_gap)).clamp(0.0, 1.0)
}

pub fn jaccard(a: &HashSet<String>, b: &HashSet<String>) -> f64 {
    let inter = a.intersection(b).count();
    let union = a.len() + b.len() - inter;
    ratio_or_zero(inter as f64, union as f64)
}

/// Univariate score over precomputed profiles.
pub fn uni_score_profiles(a: &UniProfile, b: &UniProfile) -> Result<f64> {
    match (a, b) {
        (
            UniProfile::Numeric { stats: sa, name: na, .. },
            UniProfile::Numeric { stats: sb, name: nb, .. },
        ) => {
            let sa = sa.as_ref().ok_or_else(|| Error::EmptyAttribute(na.clone()))?;
            let sb = sb.as_ref().ok_or_else(|| Error::EmptyAttribute(nb.clone()))?;
            Ok(numeric_similarity(sa, sb))
        }
        _ => Ok(jaccard(a.value_set()?, b.value_set()?)),
    }
}

/// Univariate score of one pair. Mixed numeric/categorical pairs discretize
/// the numeric side into `bins` equal-width bins first.
pub fn uni_score(a: &Attribute, b: &Attribute, bins: usize) -> Result<f64> {
    uni_score_profiles(&UniProfile::new(a, bins), &UniProfile::new(b, bins))
}

/// Pearson correlation over pairwise-complete positions. Zero variance on
/// either side yields 0.
pub fn pearson(x: &[Option<f64>], y: &[Option<f64>]) -> Result<f64> {
    assert_eq!(x.len(), y.len(), "pearson inputs must be aligned");
    let pairs: Vec<(f64, f64)> = x
        .iter()
        .zip(y)
        .filter_map(|(a, b)| Some(((*a)?, (*b)?)))
        .collect();
    if pairs.len() < 2 {
        return Err(Error::InsufficientData(pairs.len()));
    }
    let n = pairs.len() as f64;
    let mx = pairs.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pairs.iter().map(|p| p.1).sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in &pairs {
        let dx = a - mx;
        let dy = b - my;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Ok(0.0);
    }
    Ok((sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0))
}

/// Numeric encoding used for correlation. Categorical cells become the count
/// of their (case-folded) value within the column.
pub fn encode_for_correlation(attr: &Attribute) -> Vec<Option<f64>> {
    match attr.values() {
        Values::Numeric(v) => v.clone(),
        Values::Categorical(v) => {
            let mut counts: HashMap<String, usize> = HashMap::new();
            for s in v.iter().flatten() {
                *counts.entry(fold(s)).or_default() += 1;
            }
            v.iter()
                .map(|c| c.as_ref().map(|s| counts[&fold(s)] as f64))
                .collect()
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProfileEntry {
    pub attribute: String,
    pub pc: f64,
}

/// Attributes of one dataset ranked by their correlation with a pivot.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CorrelationProfile {
    pub pivot: String,
    pub entries: Vec<ProfileEntry>,
}

/// Correlation encodings for every attribute of a dataset, computed once.
#[derive(Clone, Debug)]
pub struct EncodedDataset {
    names: Vec<String>,
    columns: Vec<Vec<Option<f64>>>,
}

impl EncodedDataset {
    pub fn new(dataset: &Dataset) -> Self {
        EncodedDataset {
            names: dataset.names().map(str::to_string).collect(),
            columns: dataset.attributes().iter().map(encode_for_correlation).collect(),
        }
    }

    pub fn profile(&self, pivot: usize) -> CorrelationProfile {
        let mut entries: Vec<ProfileEntry> = (0..self.names.len())
            .filter(|&i| i != pivot)
            .map(|i| ProfileEntry {
                attribute: self.names[i].clone(),
                // too few complete rows carries no signal, same as a constant column
                pc: pearson(&self.columns[pivot], &self.columns[i]).unwrap_or(0.0),
            })
            .collect();
        entries.sort_by(|a, b| b.pc.total_cmp(&a.pc).then_with(|| a.attribute.cmp(&b.attribute)));
        CorrelationProfile {
            pivot: self.names[pivot].clone(),
            entries,
        }
    }
}

pub fn correlation_profile(dataset: &Dataset, pivot: &str) -> Result<CorrelationProfile> {
    let idx = dataset
        .index_of(pivot)
        .ok_or_else(|| Error::UnknownAttribute(pivot.to_string()))?;
    Ok(EncodedDataset::new(dataset).profile(idx))
}

pub type PairMap = BTreeMap<(String, String), f64>;

/// Scores every cross pair of two profiles by `1 - |pc_s - pc_d| / 2`.
pub fn mirror_correlation(src: &CorrelationProfile, dst: &CorrelationProfile) -> PairMap {
    let mut out = BTreeMap::new();
    for s in &src.entries {
        for d in &dst.entries {
            let sim = 1.0 - (s.pc - d.pc).abs() / 2.0;
            out.insert((s.attribute.clone(), d.attribute.clone()), sim.clamp(0.0, 1.0));
        }
    }
    out
}

#[derive(Clone, Debug, PartialEq)]
pub struct MulScores {
    pub scores: PairMap,
    /// Pivots actually used, with canonical attribute names.
    pub pivots: Vec<KnownPair>,
}

/// Multivariate matcher with cached correlation encodings for both datasets.
#[derive(Clone, Debug)]
pub struct MultivariateMatcher {
    source: EncodedDataset,
    dest: EncodedDataset,
    source_index: HashMap<String, usize>,
    dest_index: HashMap<String, usize>,
}

impl MultivariateMatcher {
    pub fn new(source: &Dataset, dest: &Dataset) -> Self {
        let index = |ds: &Dataset| {
            ds.names()
                .enumerate()
                .map(|(i, n)| (fold(n), i))
                .collect::<HashMap<_, _>>()
        };
        MultivariateMatcher {
            source: EncodedDataset::new(source),
            dest: EncodedDataset::new(dest),
            source_index: index(source),
            dest_index: index(dest),
        }
    }

    /// Pivot pair drawn uniformly from all source x destination pairs.
    pub fn random_pivot(&self, seed: u64) -> Option<KnownPair> {
        let (ns, nd) = (self.source.names.len(), self.dest.names.len());
        if ns == 0 || nd == 0 {
            return None;
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let idx = rng.random_range(0..ns * nd);
        Some(KnownPair {
            source_attr: self.source.names[idx / nd].clone(),
            dest_attr: self.dest.names[idx % nd].clone(),
            origin: PairOrigin::RandomPivot,
        })
    }

    fn resolve(&self, pair: &KnownPair) -> Result<(usize, usize)> {
        let s = *self
            .source_index
            .get(&fold(&pair.source_attr))
            .ok_or_else(|| Error::UnknownAttribute(pair.source_attr.clone()))?;
        let d = *self
            .dest_index
            .get(&fold(&pair.dest_attr))
            .ok_or_else(|| Error::UnknownAttribute(pair.dest_attr.clone()))?;
        Ok((s, d))
    }

    /// Mirror map for a single pivot.
    pub fn pivot_scores(&self, pair: &KnownPair) -> Result<PairMap> {
        let (s, d) = self.resolve(pair)?;
        Ok(mirror_correlation(&self.source.profile(s), &self.dest.profile(d)))
    }

    /// Averages the mirror maps of all known pairs; draws a seeded random
    /// pivot when there are none.
    pub fn score(&self, known: &[KnownPair], seed: u64) -> Result<MulScores> {
        let pivots: Vec<KnownPair> = if known.is_empty() {
            self.random_pivot(seed).into_iter().collect()
        } else {
            known
                .iter()
                .map(|k| {
                    let (s, d) = self.resolve(k)?;
                    Ok(KnownPair {
                        source_attr: self.source.names[s].clone(),
                        dest_attr: self.dest.names[d].clone(),
                        origin: k.origin,
                    })
                })
                .collect::<Result<_>>()?
        };
        let mut sums: BTreeMap<(String, String), (f64, usize)> = BTreeMap::new();
        for p in &pivots {
            for (key, v) in self.pivot_scores(p)? {
                let e = sums.entry(key).or_insert((0.0, 0));
                e.0 += v;
                e.1 += 1;
            }
        }
        let scores = sums
            .into_iter()
            .map(|(k, (sum, n))| (k, sum / n as f64))
            .collect();
        Ok(MulScores { scores, pivots })
    }
}

/// One-shot multivariate scoring of two datasets.
pub fn mul_score(source: &Dataset, dest: &Dataset, known: &[KnownPair], seed: u64) -> Result<MulScores> {
    MultivariateMatcher::new(source, dest).score(known, seed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    fn opt(v: &[f64]) -> Vec<Option<f64>> {
        v.iter().copied().map(Some).collect()
    }

    #[test]
    fn stats_examples() {
        let s = stats(&Attribute::from_f64s("h", &[8., 0., 2.])).unwrap();
        assert!(close(s.mean, 3.33, 0.01) && close(s.sd, 3.40, 0.01), "{s:?}");
        let s = stats(&Attribute::from_f64s("h", &[0., 1., 5.])).unwrap();
        assert!(close(s.mean, 2.0, 0.01) && close(s.sd, 2.16, 0.01), "{s:?}");
        let s = stats(&Attribute::from_f64s("h", &[4.5; 3])).unwrap();
        assert_eq!((s.mean, s.sd, s.n), (4.5, 0.0, 3));
    }

    #[test]
    fn stats_ignores_nulls_and_rejects_empty() {
        let s = stats(&Attribute::numeric("h", vec![Some(1.0), None, Some(3.0)])).unwrap();
        assert_eq!((s.mean, s.n), (2.0, 2));
        assert!(matches!(
            stats(&Attribute::numeric("h", vec![None])),
            Err(Error::EmptyAttribute(_))
        ));
    }

    #[test]
    fn uni_numeric_table_two() {
        let a = Attribute::from_f64s("u_heightCode", &[8., 0., 2.]);
        let b = Attribute::from_f64s("u_height_class", &[0., 1., 5.]);
        let s = uni_score(&a, &b, 5).unwrap();
        assert!(close(s, 0.61, 0.01), "{s}");
    }

    #[test]
    fn uni_categorical_table_two() {
        let a = Attribute::from_strs(
            "treesp3",
            &["Eucalyptus rossii", "Eucalyptus bridgesiana", "Allocasuarina verticillata"],
        );
        let b = Attribute::from_strs(
            "u_species3",
            &["Eucalyptus bridgesiana", "Atalaya hemiglauca", "Pomaderris aspera"],
        );
        assert_eq!(uni_score(&a, &b, 5).unwrap(), 0.2);
    }

    #[test]
    fn uni_identical_numeric() {
        let a = Attribute::from_f64s("a", &[1., 5., 9.]);
        assert_eq!(uni_score(&a, &a.renamed("b"), 5).unwrap(), 1.0);
    }

    #[test]
    fn uni_zero_means_and_negative_means() {
        let a = Attribute::from_f64s("a", &[0., 0.]);
        assert_eq!(uni_score(&a, &a.renamed("b"), 5).unwrap(), 1.0);
        let neg = Attribute::from_f64s("n", &[-10., -20.]);
        let pos = Attribute::from_f64s("p", &[10., 20.]);
        let s = uni_score(&neg, &pos, 5).unwrap();
        assert!((0.0..=1.0).contains(&s));
    }

    #[test]
    fn uni_mixed_uses_bins() {
        let num = Attribute::from_f64s("n", &[0., 10.]);
        let cat = Attribute::from_strs("c", &["bin_0", "other"]);
        assert!(close(uni_score(&num, &cat, 2).unwrap(), 1.0 / 3.0, 1e-12));
        assert!(close(uni_score(&cat, &num, 2).unwrap(), 1.0 / 3.0, 1e-12));
    }

    #[test]
    fn uni_case_insensitive_values() {
        let a = Attribute::from_strs("a", &["Acacia", "EUCALYPTUS"]);
        let b = Attribute::from_strs("b", &["acacia", "eucalyptus"]);
        assert_eq!(uni_score(&a, &b, 5).unwrap(), 1.0);
    }

    #[test]
    fn uni_empty_attribute() {
        let a = Attribute::numeric("a", vec![None]);
        let b = Attribute::from_f64s("b", &[1.]);
        assert!(matches!(uni_score(&a, &b, 5), Err(Error::EmptyAttribute(_))));
        let c = Attribute::categorical("c", vec![None]);
        assert!(matches!(uni_score(&b, &c, 5), Err(Error::EmptyAttribute(_))));
    }

    #[test]
    fn pearson_examples() {
        assert!(close(pearson(&opt(&[1., 2., 3.]), &opt(&[2., 4., 6.])).unwrap(), 1.0, 1e-12));
        assert!(close(pearson(&opt(&[1., 2., 3.]), &opt(&[3., 2., 1.])).unwrap(), -1.0, 1e-12));
        // cov = 4/4 * ... : dx = [-1.5,-.5,.5,1.5], dy = [-1.5,.5,-.5,1.5]; sxy = 4, sxx = syy = 5
        assert!(close(pearson(&opt(&[1., 2., 3., 4.]), &opt(&[1., 3., 2., 4.])).unwrap(), 0.8, 1e-12));
    }

    #[test]
    fn pearson_edge_cases() {
        assert_eq!(pearson(&opt(&[1., 1., 1.]), &opt(&[1., 2., 3.])).unwrap(), 0.0);
        assert!(matches!(
            pearson(&[Some(1.0), None, Some(2.0)], &[None, Some(1.0), Some(3.0)]),
            Err(Error::InsufficientData(1))
        ));
        // pairwise-complete rows only
        let r = pearson(&[Some(1.0), None, Some(2.0), Some(3.0)], &[Some(2.0), Some(100.0), Some(4.0), Some(6.0)]);
        assert!(close(r.unwrap(), 1.0, 1e-12));
    }

    #[test]
    fn frequency_encoding() {
        let a = Attribute::categorical("c", vec![Some("x".into()), Some("X".into()), Some("y".into()), None]);
        assert_eq!(encode_for_correlation(&a), vec![Some(2.0), Some(2.0), Some(1.0), None]);
    }

    fn three_attr(name: &str) -> Dataset {
        Dataset::new(
            name,
            vec![
                Attribute::from_f64s("a1", &[1., 2., 3., 4., 5.]),
                Attribute::from_f64s("a2", &[2., 4., 6., 8., 10.]),
                Attribute::from_f64s("a3", &[3., 1., 5., 2., 4.]),
            ],
        )
        .unwrap()
    }

    #[test]
    fn profile_shape_and_order() {
        let ds = three_attr("s");
        let p = correlation_profile(&ds, "a1").unwrap();
        assert_eq!(p.entries.len(), 2);
        assert_eq!(p.entries[0].attribute, "a2");
        assert!(close(p.entries[0].pc, 1.0, 1e-12));
        assert!(p.entries.iter().all(|e| e.attribute != "a1"));
        assert!(matches!(correlation_profile(&ds, "zz"), Err(Error::UnknownAttribute(_))));

        let single = Dataset::new("one", vec![Attribute::from_f64s("x", &[1., 2.])]).unwrap();
        assert!(correlation_profile(&single, "x").unwrap().entries.is_empty());
    }

    #[test]
    fn profile_ties_break_by_name() {
        let ds = Dataset::new(
            "t",
            vec![
                Attribute::from_f64s("p", &[1., 2., 3.]),
                Attribute::from_f64s("z", &[5., 5., 5.]),
                Attribute::from_f64s("b", &[7., 7., 7.]),
            ],
        )
        .unwrap();
        let p = correlation_profile(&ds, "p").unwrap();
        let names: Vec<_> = p.entries.iter().map(|e| e.attribute.as_str()).collect();
        assert_eq!(names, ["b", "z"]);
    }

    #[test]
    fn mirror_extremes() {
        let mk = |pivot: &str, entries: &[(&str, f64)]| CorrelationProfile {
            pivot: pivot.into(),
            entries: entries
                .iter()
                .map(|(a, pc)| ProfileEntry { attribute: a.to_string(), pc: *pc })
                .collect(),
        };
        let m = mirror_correlation(&mk("s", &[("x", 1.0), ("y", 0.3)]), &mk("d", &[("u", -1.0), ("v", 0.3)]));
        assert_eq!(m.len(), 4);
        assert_eq!(m[&("x".into(), "u".into())], 0.0);
        assert_eq!(m[&("y".into(), "v".into())], 1.0);
    }

    #[test]
    fn mul_one_pivot_three_by_three() {
        let s = three_attr("s");
        let d = three_attr("d");
        let m = mul_score(&s, &d, &[KnownPair::user("a1", "a1")], 0).unwrap();
        assert_eq!(m.scores.len(), 4);
        assert_eq!(m.scores[&("a2".into(), "a2".into())], 1.0);
        assert_eq!(m.scores[&("a3".into(), "a3".into())], 1.0);
    }

    #[test]
    fn mul_random_pivot_recorded_and_seeded() {
        let s = three_attr("s");
        let d = three_attr("d");
        let a = mul_score(&s, &d, &[], 7).unwrap();
        let b = mul_score(&s, &d, &[], 7).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.pivots.len(), 1);
        assert_eq!(a.pivots[0].origin, PairOrigin::RandomPivot);
    }

    #[test]
    fn mul_averages_pivots() {
        let s = three_attr("s");
        let d = three_attr("d");
        let m = MultivariateMatcher::new(&s, &d);
        let p1 = KnownPair::user("a1", "a1");
        let p2 = KnownPair::user("a2", "a2");
        let m1 = m.pivot_scores(&p1).unwrap();
        let m2 = m.pivot_scores(&p2).unwrap();
        let both = m.score(&[p1.clone(), p2.clone()], 0).unwrap().scores;
        for (k, v) in &both {
            let vals: Vec<f64> = [m1.get(k), m2.get(k)].into_iter().flatten().copied().collect();
            let mean = vals.iter().sum::<f64>() / vals.len() as f64;
            assert!(close(*v, mean, 1e-12));
        }
        // a known pair never changes another pivot's own map
        assert_eq!(m.pivot_scores(&p1).unwrap(), m1);
        // identical maps average to themselves
        let twice = m.score(&[p1.clone(), p1], 0).unwrap().scores;
        assert_eq!(twice, m1);
    }

    #[test]
    fn mul_unknown_pivot() {
        let s = three_attr("s");
        assert!(matches!(
            mul_score(&s, &s, &[KnownPair::user("a1", "nope")], 0),
            Err(Error::UnknownAttribute(_))
        ));
    }

    proptest! {
        #[test]
        fn pearson_affine_invariance(
            xy in proptest::collection::vec((-100.0f64..100.0, -100.0f64..100.0), 3..30),
            a in 0.1f64..10.0,
            b in -50.0f64..50.0,
        ) {
            let x: Vec<Option<f64>> = xy.iter().map(|p| Some(p.0)).collect();
            let y: Vec<Option<f64>> = xy.iter().map(|p| Some(p.1)).collect();
            let base = pearson(&x, &y).unwrap();
            let pos: Vec<Option<f64>> = x.iter().map(|v| v.map(|v| a * v + b)).collect();
            let neg: Vec<Option<f64>> = x.iter().map(|v| v.map(|v| -a * v + b)).collect();
            prop_assert!((pearson(&pos, &y).unwrap() - base).abs() < 1e-9);
            prop_assert!((pearson(&neg, &y).unwrap() + base).abs() < 1e-9);
        }

        #[test]
        fn uni_symmetric(
            a in proptest::collection::vec(-1e3f64..1e3, 1..20),
            b in proptest::collection::vec(-1e3f64..1e3, 1..20),
        ) {
            let aa = Attribute::from_f64s("a", &a);
            let bb = Attribute::from_f64s("b", &b);
            let ab = uni_score(&aa, &bb, 5).unwrap();
            prop_assert_eq!(ab, uni_score(&bb, &aa, 5).unwrap());
            prop_assert!((0.0..=1.0).contains(&ab));
        }

        #[test]
        fn mirror_self_diagonal(pcs in proptest::collection::vec(-1.0f64..1.0, 1..8)) {
            let p = CorrelationProfile {
                pivot: "p".into(),
                entries: pcs.iter().enumerate().map(|(i, pc)| ProfileEntry { attribute: format!("a{i}"), pc: *pc }).collect(),
            };
            let m = mirror_correlation(&p, &p);
            for ((s, d), v) in &m {
                prop_assert!((0.0..=1.0).contains(v));
                if s == d {
                    prop_assert_eq!(*v, 1.0);
                }
            }
        }
    }
}
