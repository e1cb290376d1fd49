use std::path::PathBuf;

/// Errors produced anywhere in the matching pipeline.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed csv: {0}")]
    MalformedCsv(String),

    #[error("duplicate attribute name `{0}` (names are compared case-insensitively)")]
    DuplicateHeader(String),

    #[error("{which} weights sum to {sum}, expected 1")]
    WeightSum { which: &'static str, sum: f64 },

    #[error("{which} weights contain a negative or non-finite entry")]
    NegativeWeight { which: &'static str },

    #[error("parameter `{name}` out of range: {value}")]
    NonPositiveParam { name: &'static str, value: u64 },

    #[error("attribute `{0}` has no non-null values")]
    EmptyAttribute(String),

    #[error("attribute `{0}` is not numeric")]
    NotNumeric(String),

    #[error("attribute `{name}` has {got} values, dataset has {expected} rows")]
    RaggedAttribute {
        name: String,
        got: usize,
        expected: usize,
    },

    #[error("dataset `{0}` has no attributes")]
    EmptyDataset(String),

    #[error("unknown attribute `{0}`")]
    UnknownAttribute(String),

    #[error("need at least 2 pairwise-complete rows for correlation, got {0}")]
    InsufficientData(usize),

    #[error("pair ({source_attr}, {dest_attr}) conflicts with an existing confirmation")]
    DuplicateConfirmation {
        source_attr: String,
        dest_attr: String,
    },

    #[error("invalid rule: {0}")]
    InvalidRule(String),

    #[error("ground truth is empty")]
    EmptyGroundTruth,

    #[error("invalid ground truth row {row}: {message}")]
    InvalidGroundTruth { row: usize, message: String },

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
