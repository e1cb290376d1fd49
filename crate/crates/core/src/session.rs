//! Mutable review state for the confirm-and-rescore loop.

use std::collections::BTreeSet;
use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};

use crate::ensemble::{Exclusions, Scorer, Suggestion, rank_excluding};
use crate::error::{Error, Result};
use crate::evaluation::{
    EvalReport, GroundTruth, MAX_TOP_N, enabled_timings, evaluate_f1, topn_accuracy,
};
use crate::model::{Dataset, KnownPair, MatcherConfig, PairOrigin, ScoreMatrix, fold};
use crate::schema::RuleSet;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DecisionAction {
    Confirm,
    Reject,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Decision {
    pub timestamp_ms: u64,
    pub action: DecisionAction,
    pub source_attr: String,
    pub dest_attr: String,
}

/// Everything needed to rebuild a session.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SessionSnapshot {
    pub id: String,
    pub source: Dataset,
    pub dest: Dataset,
    pub config: MatcherConfig,
    pub rules: RuleSet,
    pub known: Vec<KnownPair>,
    pub rejected: Vec<(String, String)>,
    pub decisions: Vec<Decision>,
    pub truth: Option<Vec<(String, String)>>,
}

impl SessionSnapshot {
    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let json = serde_json::to_string_pretty(self)?;
        std::fs::write(path, json).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Ok(serde_json::from_str(&text)?)
    }
}

fn now_ms() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_millis() as u64)
        .unwrap_or(0)
}

/// One review session over a source/destination pair of datasets.
#[derive(Debug)]
pub struct MatchSession {
    id: String,
    source: Dataset,
    dest: Dataset,
    cfg: MatcherConfig,
    rules: RuleSet,
    known: Vec<KnownPair>,
    rejected: BTreeSet<(String, String)>,
    decisions: Vec<Decision>,
    truth: Option<GroundTruth>,
    scorer: Scorer,
    matrix: ScoreMatrix,
}

impl MatchSession {
    pub fn new(
        id: impl Into<String>,
        source: Dataset,
        dest: Dataset,
        cfg: MatcherConfig,
        rules: RuleSet,
        initial_known: Vec<KnownPair>,
        truth: Option<GroundTruth>,
    ) -> Result<Self> {
        if let Some(t) = &truth {
            t.validate(&source, &dest)?;
        }
        let mut scorer = Scorer::new(&source, &dest, &rules, &cfg)?;
        let mut session = MatchSession {
            id: id.into(),
            matrix: scorer.score(&[])?,
            source,
            dest,
            cfg,
            rules,
            known: Vec::new(),
            rejected: BTreeSet::new(),
            decisions: Vec::new(),
            truth,
            scorer,
        };
        for k in initial_known {
            let pair = session.canonical_pair(&k.source_attr, &k.dest_attr)?;
            session.check_unconfirmed(&pair.0, &pair.1)?;
            session.known.push(KnownPair {
                source_attr: pair.0,
                dest_attr: pair.1,
                origin: k.origin,
            });
        }
        if !session.known.is_empty() {
            session.matrix = session.scorer.score(&session.known)?;
        }
        Ok(session)
    }

    pub fn from_snapshot(snapshot: SessionSnapshot) -> Result<Self> {
        let truth = snapshot.truth.map(GroundTruth::new).transpose()?;
        let mut session = MatchSession::new(
            snapshot.id,
            snapshot.source,
            snapshot.dest,
            snapshot.config,
            snapshot.rules,
            snapshot.known,
            truth,
        )?;
        for (s, d) in snapshot.rejected {
            let pair = session.canonical_pair(&s, &d)?;
            session.rejected.insert(pair);
        }
        session.decisions = snapshot.decisions;
        Ok(session)
    }

    pub fn snapshot(&self) -> SessionSnapshot {
        SessionSnapshot {
            id: self.id.clone(),
            source: self.source.clone(),
            dest: self.dest.clone(),
            config: self.cfg.clone(),
            rules: self.rules.clone(),
            known: self.known.clone(),
            rejected: self.rejected.iter().cloned().collect(),
            decisions: self.decisions.clone(),
            truth: self.truth.as_ref().map(|t| t.pairs().to_vec()),
        }
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn config(&self) -> &MatcherConfig {
        &self.cfg
    }

    pub fn source(&self) -> &Dataset {
        &self.source
    }

    pub fn dest(&self) -> &Dataset {
        &self.dest
    }

    pub fn known(&self) -> &[KnownPair] {
        &self.known
    }

    pub fn decisions(&self) -> &[Decision] {
        &self.decisions
    }

    pub fn rejected(&self) -> impl Iterator<Item = &(String, String)> {
        self.rejected.iter()
    }

    pub fn matrix(&self) -> &ScoreMatrix {
        &self.matrix
    }

    pub fn truth(&self) -> Option<&GroundTruth> {
        self.truth.as_ref()
    }

    fn canonical_pair(&self, source_attr: &str, dest_attr: &str) -> Result<(String, String)> {
        let s = self.source.require(source_attr)?.name().to_string();
        let d = self.dest.require(dest_attr)?.name().to_string();
        Ok((s, d))
    }

    fn check_unconfirmed(&self, source_attr: &str, dest_attr: &str) -> Result<()> {
        let (s, d) = (fold(source_attr), fold(dest_attr));
        let clash = self
            .known
            .iter()
            .filter(|k| k.origin != PairOrigin::RandomPivot)
            .any(|k| fold(&k.source_attr) == s || fold(&k.dest_attr) == d);
        if clash {
            return Err(Error::DuplicateConfirmation {
                source_attr: source_attr.to_string(),
                dest_attr: dest_attr.to_string(),
            });
        }
        Ok(())
    }

    /// Records a user confirmation and recomputes the multivariate and final
    /// scores. Fixed components are reused.
    pub fn confirm(&mut self, source_attr: &str, dest_attr: &str) -> Result<&ScoreMatrix> {
        let (s, d) = self.canonical_pair(source_attr, dest_attr)?;
        self.check_unconfirmed(&s, &d)?;
        let mut known = self.known.clone();
        known.push(KnownPair::user(s.clone(), d.clone()));
        self.matrix = self.scorer.score(&known)?;
        self.known = known;
        self.decisions.push(Decision {
            timestamp_ms: now_ms(),
            action: DecisionAction::Confirm,
            source_attr: s,
            dest_attr: d,
        });
        Ok(&self.matrix)
    }

    /// Hides a pair from future suggestions. Rejecting twice is a no-op.
    pub fn reject(&mut self, source_attr: &str, dest_attr: &str) -> Result<()> {
        let (s, d) = self.canonical_pair(source_attr, dest_attr)?;
        let confirmed = self
            .known
            .iter()
            .any(|k| fold(&k.source_attr) == fold(&s) && fold(&k.dest_attr) == fold(&d));
        if confirmed {
            return Err(Error::DuplicateConfirmation {
                source_attr: s,
                dest_attr: d,
            });
        }
        if self.rejected.insert((s.clone(), d.clone())) {
            self.decisions.push(Decision {
                timestamp_ms: now_ms(),
                action: DecisionAction::Reject,
                source_attr: s,
                dest_attr: d,
            });
        }
        Ok(())
    }

    pub fn exclusions(&self) -> Exclusions {
        let mut ex = Exclusions::from_known(&self.known);
        for (s, d) in &self.rejected {
            ex.reject(s, d);
        }
        ex
    }

    /// Pending suggestions: confirmed attributes and rejected pairs withheld.
    pub fn suggestions(&self, top_n: usize) -> Vec<Suggestion> {
        rank_excluding(&self.matrix, top_n, &self.exclusions())
    }

    /// Evaluation of the current state against the session's ground truth.
    pub fn report(&self) -> Option<Result<EvalReport>> {
        let truth = self.truth.as_ref()?.without_known(&self.known);
        let suggestions = self.suggestions(MAX_TOP_N.max(self.cfg.top_n));
        Some(evaluate_f1(&suggestions, &truth).map(|f1| {
            let t = self.scorer.timings();
            EvalReport {
                precision: f1.precision,
                recall: f1.recall,
                f1: f1.f1,
                topn_accuracy: (1..=MAX_TOP_N)
                    .map(|n| (n, topn_accuracy(&suggestions, &truth, n)))
                    .collect(),
                timings: enabled_timings(&t, &self.cfg.weights),
            }
        }))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ensemble::score_all;
    use crate::model::Attribute;

    fn fig_three(prefix: &str) -> Dataset {
        let a1 = [1., 2., 3., 4., 5., 6.];
        let a2 = [2., 4., 5., 9., 10., 12.];
        let a3 = [6., 1., 4., 2., 5., 3.];
        Dataset::new(
            prefix,
            vec![
                Attribute::from_f64s(format!("{prefix}1"), &a1),
                Attribute::from_f64s(format!("{prefix}2"), &a2),
                Attribute::from_f64s(format!("{prefix}3"), &a3),
            ],
        )
        .unwrap()
    }

    fn session() -> MatchSession {
        MatchSession::new(
            "t",
            fig_three("s"),
            fig_three("d"),
            MatcherConfig::default(),
            RuleSet::empty(),
            vec![],
            None,
        )
        .unwrap()
    }

    #[test]
    fn confirm_excludes_and_rescores() {
        let mut s = session();
        let before = s.matrix().get("s2", "d2").unwrap().mul;
        s.confirm("s1", "d1").unwrap();
        let sugg = s.suggestions(4);
        assert_eq!(sugg.len(), 2);
        assert!(sugg.iter().all(|x| x.source_attr != "s1"));
        assert!(sugg.iter().flat_map(|x| &x.ranked).all(|c| c.dest_attr != "d1"));
        assert_eq!(s.matrix().get("s2", "d2").unwrap().mul, 1.0);
        let _ = before;
        assert_eq!(s.decisions().len(), 1);
    }

    #[test]
    fn duplicate_confirmation() {
        let mut s = session();
        s.confirm("s1", "d1").unwrap();
        assert!(matches!(s.confirm("s1", "d1"), Err(Error::DuplicateConfirmation { .. })));
        assert!(matches!(s.confirm("S1", "d2"), Err(Error::DuplicateConfirmation { .. })));
        assert!(matches!(s.confirm("nope", "d2"), Err(Error::UnknownAttribute(_))));
    }

    #[test]
    fn all_but_one_confirmed() {
        let mut s = session();
        s.confirm("s1", "d1").unwrap();
        s.confirm("s2", "d2").unwrap();
        let sugg = s.suggestions(4);
        assert_eq!(sugg.len(), 1);
        assert_eq!(sugg[0].ranked.len(), 1);
    }

    #[test]
    fn rejected_pairs_never_reappear() {
        let mut s = session();
        let top = s.suggestions(1)[0].top().unwrap().dest_attr.clone();
        s.reject("s1", &top).unwrap();
        s.reject("s1", &top).unwrap();
        assert_eq!(s.decisions().len(), 1);
        assert!(s.suggestions(4)[0].rank_of(&top).is_none());
        s.confirm("s2", "d2").unwrap();
        assert!(s.suggestions(4)[0].rank_of(&top).is_none());
    }

    #[test]
    fn cannot_reject_confirmed() {
        let mut s = session();
        s.confirm("s1", "d1").unwrap();
        assert!(s.reject("s1", "d1").is_err());
    }

    #[test]
    fn fingerprint_tracks_known() {
        let mut s = session();
        s.confirm("s1", "d1").unwrap();
        assert_eq!(
            s.matrix().config_fingerprint,
            crate::model::config_fingerprint(s.config(), s.known())
        );
    }

    #[test]
    fn api_path_matches_batch_path() {
        let mut s = session();
        s.confirm("s1", "d1").unwrap();
        s.confirm("s3", "d3").unwrap();
        let batch = score_all(
            s.source(),
            s.dest(),
            &RuleSet::empty(),
            s.known(),
            &MatcherConfig::default(),
        )
        .unwrap();
        assert_eq!(&batch, s.matrix());
        assert_eq!(
            rank_excluding(&batch, 4, &Exclusions::from_known(s.known())),
            s.suggestions(4)
        );
    }

    #[test]
    fn snapshot_round_trip() {
        let mut s = session();
        s.confirm("s1", "d1").unwrap();
        s.reject("s2", "d3").unwrap();
        let json = serde_json::to_string(&s.snapshot()).unwrap();
        let back = MatchSession::from_snapshot(serde_json::from_str(&json).unwrap()).unwrap();
        assert_eq!(back.matrix(), s.matrix());
        assert_eq!(back.suggestions(4), s.suggestions(4));
        assert_eq!(back.decisions(), s.decisions());
    }

    #[test]
    fn report_needs_truth() {
        let s = session();
        assert!(s.report().is_none());
        let truth = GroundTruth::new((1..=3).map(|i| (format!("s{i}"), format!("d{i}")))).unwrap();
        let s = MatchSession::new(
            "t",
            fig_three("s"),
            fig_three("d"),
            MatcherConfig::default(),
            RuleSet::empty(),
            vec![KnownPair::user("s1", "d1")],
            Some(truth),
        )
        .unwrap();
        let r = s.report().unwrap().unwrap();
        assert!((0.0..=1.0).contains(&r.f1));
        assert_eq!(r.topn_accuracy.len(), 4);
    }
}
