mod common;

use proptest::prelude::*;
use rand::SeedableRng;
use rand::seq::SliceRandom;
use rand_chacha::ChaCha8Rng;

use common::*;
use schemamatch::ensemble::{Exclusions, rank, rank_excluding, score_all};
use schemamatch::evaluation::{GroundTruth, evaluate, evaluate_f1, topn_accuracy};
use schemamatch::instance::MultivariateMatcher;
use schemamatch::model::{Attribute, Dataset, KnownPair, MatcherConfig};
use schemamatch::schema::RuleSet;
use schemamatch::session::MatchSession;

fn arb_weights() -> impl Strategy<Value = [f64; 4]> {
    prop::array::uniform4(0.0f64..1.0).prop_filter_map("non-zero", |w| {
        let sum: f64 = w.iter().sum();
        (sum > 1e-3).then(|| w.map(|x| x / sum))
    })
}

fn dataset_pair() -> impl Strategy<Value = (Dataset, Dataset)> {
    (arb_dataset("s"), arb_dataset("d"))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn components_in_unit_range_and_final_reconstructs((s, d) in dataset_pair(), w in arb_weights(), seed in 0u64..100) {
        let cfg = MatcherConfig { seed, ..MatcherConfig::default().with_weights(w) };
        let m = score_all(&s, &d, &RuleSet::empty(), &[], &cfg).unwrap();
        prop_assert_eq!(m.len(), s.len() * d.len());
        for p in &m.pairs {
            for v in p.components() {
                prop_assert!((0.0..=1.0).contains(&v));
            }
            prop_assert!((0.0..=1.0).contains(&p.final_score));
            prop_assert!((p.final_score - p.combined(&w)).abs() <= 1e-9);
        }
    }

    #[test]
    fn scaling_weights_keeps_the_ordering((s, d) in dataset_pair(), w in arb_weights(), k in 0.1f64..10.0) {
        let m = score_all(&s, &d, &RuleSet::empty(), &[], &MatcherConfig::default().with_weights(w)).unwrap();
        let scaled: [f64; 4] = w.map(|x| x * k);
        let sum: f64 = scaled.iter().sum();
        let renorm = scaled.map(|x| x / sum);
        let m2 = score_all(&s, &d, &RuleSet::empty(), &[], &MatcherConfig::default().with_weights(renorm)).unwrap();
        let names = |m: &schemamatch::ScoreMatrix| -> Vec<Vec<String>> {
            rank(m, d.len()).into_iter().map(|s| s.ranked.into_iter().map(|c| c.dest_attr).collect()).collect()
        };
        // Renormalizing may move a score by an ulp; only compare when no near-ties exist.
        let gaps_ok = m.pairs.chunks(d.len()).all(|row| {
            let mut f: Vec<f64> = row.iter().map(|p| p.final_score).collect();
            f.sort_by(|a, b| a.partial_cmp(b).unwrap());
            f.windows(2).all(|w| w[1] - w[0] > 1e-12 || w[1] == w[0])
        });
        if gaps_ok {
            prop_assert_eq!(names(&m), names(&m2));
        }
    }

    #[test]
    fn rank_prefix_and_monotone_accuracy((s, d) in dataset_pair(), pick in prop::collection::vec(0usize..5, 5)) {
        let m = score_all(&s, &d, &RuleSet::empty(), &[], &MatcherConfig::default()).unwrap();
        let sources: Vec<&str> = s.names().collect();
        let dests: Vec<&str> = d.names().collect();
        let truth = GroundTruth::new(
            sources.iter().zip(&pick).map(|(a, i)| (a.to_string(), dests[i % dests.len()].to_string())),
        )
        .unwrap();
        let full = rank(&m, dests.len());
        let mut prev = 0.0;
        for n in 1..=dests.len() {
            let short = rank(&m, n);
            for (a, b) in short.iter().zip(&full) {
                prop_assert_eq!(&a.ranked[..], &b.ranked[..n]);
            }
            let acc = topn_accuracy(&full, &truth, n);
            prop_assert!(acc >= prev);
            prev = acc;
        }
        prop_assert_eq!(prev, 1.0);
    }

    #[test]
    fn pivots_are_independent((s, d) in dataset_pair(), a in 0usize..5, b in 0usize..5, c in 0usize..5, e in 0usize..5) {
        let mm = MultivariateMatcher::new(&s, &d);
        let sn: Vec<&str> = s.names().collect();
        let dn: Vec<&str> = d.names().collect();
        let p1 = KnownPair::user(sn[a % sn.len()], dn[b % dn.len()]);
        let p2 = KnownPair::user(sn[c % sn.len()], dn[e % dn.len()]);
        let alone = mm.pivot_scores(&p1).unwrap();
        let _ = mm.score(&[p2.clone()], 0).unwrap();
        prop_assert_eq!(&alone, &mm.pivot_scores(&p1).unwrap());
        let both = mm.score(&[p1.clone(), p2.clone()], 0).unwrap();
        let other = mm.pivot_scores(&p2).unwrap();
        for (k, v) in &both.scores {
            let parts: Vec<f64> = [alone.get(k), other.get(k)].into_iter().flatten().copied().collect();
            let mean = parts.iter().sum::<f64>() / parts.len() as f64;
            prop_assert!((v - mean).abs() < 1e-12);
            prop_assert!((0.0..=1.0).contains(v));
        }
    }

    #[test]
    fn shuffled_rows_change_nothing((s, d) in dataset_pair(), seed in 0u64..1000) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut os: Vec<usize> = (0..s.row_count()).collect();
        let mut od: Vec<usize> = (0..d.row_count()).collect();
        os.shuffle(&mut rng);
        od.shuffle(&mut rng);
        let (s2, d2) = (s.permute_rows(&os).unwrap(), d.permute_rows(&od).unwrap());
        let sn: Vec<&str> = s.names().collect();
        let dn: Vec<&str> = d.names().collect();
        let truth = GroundTruth::new(sn.iter().zip(dn.iter().cycle()).map(|(a, b)| (a.to_string(), b.to_string()))).unwrap();
        let known = [KnownPair::user(sn[0], dn[0])];
        let cfg = MatcherConfig::default();
        let r1 = evaluate(&s, &d, &RuleSet::empty(), &known, &truth, &cfg).unwrap();
        let r2 = evaluate(&s2, &d2, &RuleSet::empty(), &known, &truth, &cfg).unwrap();
        prop_assert!((r1.f1 - r2.f1).abs() < 1e-12 || near_tie(&s, &d, &known));
        let m1 = score_all(&s, &d, &RuleSet::empty(), &known, &cfg).unwrap();
        let m2 = score_all(&s2, &d2, &RuleSet::empty(), &known, &cfg).unwrap();
        for (p, q) in m1.pairs.iter().zip(&m2.pairs) {
            for (x, y) in p.components().iter().zip(q.components()) {
                prop_assert!((x - y).abs() <= 1e-9);
            }
        }
    }

    #[test]
    fn session_confirmations_match_batch((s, d) in dataset_pair(), order in Just(()).prop_perturb(|_, mut rng| rng.random::<u64>())) {
        let mut rng = ChaCha8Rng::seed_from_u64(order);
        let mut sn: Vec<String> = s.names().map(str::to_string).collect();
        let mut dn: Vec<String> = d.names().map(str::to_string).collect();
        sn.shuffle(&mut rng);
        dn.shuffle(&mut rng);
        let k = sn.len().min(dn.len()) - 1;
        let picks: Vec<KnownPair> = sn.iter().zip(&dn).take(k).map(|(a, b)| KnownPair::user(a.clone(), b.clone())).collect();

        let cfg = MatcherConfig::default();
        let mut session = MatchSession::new("p", s.clone(), d.clone(), cfg.clone(), RuleSet::empty(), vec![], None).unwrap();
        for p in &picks {
            session.confirm(&p.source_attr, &p.dest_attr).unwrap();
        }
        let batch = score_all(&s, &d, &RuleSet::empty(), &picks, &cfg).unwrap();
        prop_assert_eq!(session.matrix(), &batch);
        prop_assert_eq!(session.suggestions(3), rank_excluding(&batch, 3, &Exclusions::from_known(&picks)));

        let restored = MatchSession::from_snapshot(session.snapshot()).unwrap();
        prop_assert_eq!(restored.matrix(), session.matrix());
        let json = serde_json::to_string(&session.snapshot()).unwrap();
        let reloaded = MatchSession::from_snapshot(serde_json::from_str(&json).unwrap()).unwrap();
        prop_assert_eq!(reloaded.matrix().to_csv_string(), session.matrix().to_csv_string());
    }
}

fn near_tie(s: &Dataset, d: &Dataset, known: &[KnownPair]) -> bool {
    let m = score_all(s, d, &RuleSet::empty(), known, &MatcherConfig::default()).unwrap();
    m.pairs.chunks(d.len()).any(|row| {
        let mut f: Vec<f64> = row.iter().map(|p| p.final_score).collect();
        f.sort_by(|a, b| b.partial_cmp(a).unwrap());
        f.len() > 1 && (f[0] - f[1]).abs() < 1e-9 && f[0] != f[1]
    })
}

#[test]
fn renamed_copy_true_match_reaches_mirror_maximum() {
    for seed in 0..4 {
        let base = latent_dataset("base", "src_", 6, 3, 400, seed);
        let c = renamed_copy(&base, 0.0, seed);
        let known = c.first_pair();
        let mm = MultivariateMatcher::new(&c.source, &c.dest);
        let scores = mm.score(std::slice::from_ref(&known), 0).unwrap().scores;
        for (s, d) in c.truth.pairs() {
            if *s == known.source_attr {
                continue;
            }
            let row_max = scores.iter().filter(|((a, _), _)| a == s).map(|(_, v)| *v).fold(0.0, f64::max);
            let v = scores[&(s.clone(), d.clone())];
            assert_eq!(v, 1.0, "{s} -> {d}");
            assert_eq!(row_max, 1.0);
        }
    }
}

#[test]
fn perfect_prediction_scores_one() {
    let base = latent_dataset("base", "src_", 4, 2, 300, 11);
    let c = renamed_copy(&base, 0.0, 11);
    let m = score_all(&c.source, &c.dest, &RuleSet::empty(), &[c.first_pair()], &MatcherConfig::default()).unwrap();
    let mut sugg = rank(&m, 1);
    for s in &mut sugg {
        let want = c.truth.dest_for(&s.source_attr).unwrap().to_string();
        s.ranked[0].dest_attr = want;
    }
    let f = evaluate_f1(&sugg, &c.truth).unwrap();
    assert_eq!((f.precision, f.recall, f.f1), (1.0, 1.0, 1.0));
}

#[test]
fn folded_duplicate_names_rejected() {
    let err = Dataset::new(
        "x",
        vec![Attribute::from_f64s("Height", &[1.0]), Attribute::from_f64s("height", &[2.0])],
    )
    .unwrap_err();
    assert!(err.to_string().to_lowercase().contains("height"));
}

#[test]
fn absent_rules_leave_dk_zero_without_renormalizing() {
    let s = schemamatch::read_dataset(TABLE2_SOURCE.as_bytes(), "state").unwrap();
    let d = schemamatch::read_dataset(TABLE2_DEST.as_bytes(), "nvis").unwrap();
    let m = score_all(&s, &d, &RuleSet::empty(), &[], &MatcherConfig::default()).unwrap();
    for p in &m.pairs {
        assert_eq!(p.dk, 0.0);
        assert!((p.final_score - 0.25 * (p.lin + p.uni + p.mul)).abs() < 1e-12);
    }
}
