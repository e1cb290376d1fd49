#![allow(dead_code)]

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use schemamatch::evaluation::GroundTruth;
use schemamatch::model::{Attribute, Dataset, KnownPair};

pub const TABLE2_SOURCE: &str = "u_heightCode,treesp_3\n8,Eucalyptus rossii\n0,Eucalyptus bridgesiana\n2,Allocasuarina verticillata\n";
pub const TABLE2_DEST: &str = "u_height_class,u_species_3\n0,Eucalyptus bridgesiana\n1,Atalaya hemiglauca\n5,Pomaderris aspera\n";

pub struct Corpus {
    pub source: Dataset,
    pub dest: Dataset,
    pub truth: GroundTruth,
}

impl Corpus {
    pub fn first_pair(&self) -> KnownPair {
        let (s, d) = &self.truth.pairs()[0];
        KnownPair::user(s.clone(), d.clone())
    }
}

/// Columns driven by three latent factors: numeric columns sit on
/// geometrically spaced scales with their own spread and loading, each categorical column its own vocabulary cut
/// from one factor.
pub fn latent_dataset(name: &str, prefix: &str, numeric: usize, categorical: usize, rows: usize, seed: u64) -> Dataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let factors: Vec<[f64; 3]> = (0..rows)
        .map(|_| {
            [
                StandardNormal.sample(&mut rng),
                StandardNormal.sample(&mut rng),
                StandardNormal.sample(&mut rng),
            ]
        })
        .collect();
    let mut attrs = Vec::new();
    for j in 0..numeric {
        let mean = 5.0 * 1.6f64.powi(j as i32) * rng.random_range(1.0..1.1);
        let sd = mean * rng.random_range(0.05..0.4);
        let rho: f64 = rng.random_range(-0.95..0.95);
        let f = j % 3;
        let values: Vec<f64> = factors
            .iter()
            .map(|z| {
                let e: f64 = StandardNormal.sample(&mut rng);
                mean + sd * (rho * z[f] + (1.0 - rho * rho).sqrt() * e)
            })
            .collect();
        attrs.push(Attribute::from_f64s(format!("{prefix}num_{j:02}"), &values));
    }
    for j in 0..categorical {
        let levels = 3 + j % 6;
        let f = (j + 1) % 3;
        let values: Vec<Option<String>> = factors
            .iter()
            .map(|z| {
                let e: f64 = StandardNormal.sample(&mut rng);
                let t = (z[f] + 0.5 * e) / 1.2;
                let cdf = 0.5 * (1.0 + erf(t / std::f64::consts::SQRT_2));
                let k = ((cdf * levels as f64) as usize).min(levels - 1);
                Some(format!("c{j}_level{k}"))
            })
            .collect();
        attrs.push(Attribute::categorical(format!("{prefix}cat_{j:02}"), values));
    }
    Dataset::new(name, attrs).unwrap()
}

fn erf(x: f64) -> f64 {
    // Abramowitz-Stegun 7.1.26
    let t = 1.0 / (1.0 + 0.327_591_1 * x.abs());
    let y = 1.0
        - (((((1.061_405_429 * t - 1.453_152_027) * t) + 1.421_413_741) * t - 0.284_496_736) * t + 0.254_829_592)
            * t
            * (-x * x).exp();
    if x >= 0.0 { y } else { -y }
}

/// Multiplies numeric cells by `1 + U(-p, p)` and replaces a `p` share of
/// categorical cells with another level of the same column.
pub fn perturb(attr: &Attribute, p: f64, rng: &mut ChaCha8Rng) -> Attribute {
    if let Some(v) = attr.numeric_values() {
        let out: Vec<Option<f64>> = v.iter().map(|x| x.map(|x| x * (1.0 + rng.random_range(-p..p)))).collect();
        return Attribute::numeric(attr.name(), out);
    }
    let v = attr.categorical_values().unwrap();
    let mut levels: Vec<&String> = v.iter().flatten().collect();
    levels.sort();
    levels.dedup();
    let out = v
        .iter()
        .map(|x| {
            if rng.random_bool(p) {
                Some(levels[rng.random_range(0..levels.len())].clone())
            } else {
                x.clone()
            }
        })
        .collect();
    Attribute::categorical(attr.name(), out)
}

/// Destination = shuffled, renamed (and optionally perturbed) copy of `source`.
pub fn renamed_copy(source: &Dataset, noise: f64, seed: u64) -> Corpus {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
    let mut order: Vec<usize> = (0..source.len()).collect();
    order.shuffle(&mut rng);
    let mut attrs = Vec::new();
    let mut pairs = Vec::new();
    for (k, &i) in order.iter().enumerate() {
        let a = &source.attributes()[i];
        let a = if noise > 0.0 { perturb(a, noise, &mut rng) } else { a.clone() };
        let name = format!("field{k:03}");
        pairs.push((source.attributes()[i].name().to_string(), name.clone()));
        attrs.push(a.renamed(name));
    }
    let dest = Dataset::new(format!("{}_copy", source.name()), attrs).unwrap();
    Corpus {
        source: source.clone(),
        dest,
        truth: GroundTruth::new(pairs).unwrap(),
    }
}

/// Three numeric columns whose correlations with the first column differ.
pub fn mirror_triplet(prefix: &str, affine: bool) -> Dataset {
    let a1 = [1.0, 2.0, 3.0, 4.0, 5.0, 6.0];
    let a2 = [2.0, 4.0, 5.0, 9.0, 10.0, 12.0];
    let a3 = [6.0, 1.0, 4.0, 2.0, 5.0, 3.0];
    let t = |v: &[f64; 6], a: f64, b: f64| -> Vec<f64> {
        if affine { v.iter().map(|x| a * x + b).collect() } else { v.to_vec() }
    };
    Dataset::new(
        prefix,
        vec![
            Attribute::from_f64s(format!("{prefix}a3"), &t(&a3, 0.5, 7.0)),
            Attribute::from_f64s(format!("{prefix}a1"), &t(&a1, 2.0, 1.0)),
            Attribute::from_f64s(format!("{prefix}a2"), &t(&a2, 3.0, -4.0)),
        ],
    )
    .unwrap()
}

/// Small dataset with 2..5 attributes and 3..12 rows, mixing numeric columns
/// (some with gaps) and categorical ones over a short vocabulary.
pub fn arb_dataset(prefix: &'static str) -> impl proptest::strategy::Strategy<Value = Dataset> {
    use proptest::prelude::*;
    (2usize..5, 3usize..12)
        .prop_flat_map(move |(width, rows)| {
            prop::collection::vec(
                prop_oneof![
                    prop::collection::vec(prop::option::weighted(0.9, -50i32..50), rows)
                        .prop_map(|v| (true, v.into_iter().map(|x| x.map(|x| x.to_string())).collect::<Vec<_>>())),
                    prop::collection::vec(prop::option::weighted(0.9, "[a-e]"), rows).prop_map(|v| (false, v)),
                ],
                width,
            )
        })
        .prop_map(move |cols| {
            let attrs = cols
                .into_iter()
                .enumerate()
                .map(|(j, (numeric, cells))| {
                    let name = format!("{prefix}_{}", ["alpha", "beta", "gamma", "delta", "eps"][j]);
                    if numeric {
                        Attribute::numeric(name, cells.iter().map(|c| c.as_ref().map(|x| x.parse().unwrap())).collect())
                    } else {
                        Attribute::categorical(name, cells)
                    }
                })
                .collect();
            Dataset::new(prefix, attrs).unwrap()
        })
}
