//! Hybrid schema matching over two tabular datasets.
//!
//! Each (source, dest) attribute pair is scored by four matchers: domain
//! knowledge rules, a linguistic name similarity, univariate value statistics
//! and a multivariate correlation mirror anchored on known pairs. The final
//! score is a weighted sum used to rank destination candidates per source
//! attribute.

pub mod ensemble;
pub mod error;
pub mod evaluation;
pub mod ingest;
pub mod instance;
pub mod model;
pub mod schema;
pub mod server;
pub mod session;

pub use ensemble::{Candidate, Exclusions, Scorer, Suggestion, rank, rank_excluding, score_all};
pub use error::{Error, Result};
pub use evaluation::{EvalReport, GroundTruth, ablation, evaluate};
pub use ingest::{load_dataset, read_dataset};
pub use model::{
    Attribute, AttributeKind, Dataset, KnownPair, MatcherConfig, PairOrigin, PairScore, ScoreMatrix, Values,
};
pub use schema::{Rule, RuleSet};
pub use session::MatchSession;
