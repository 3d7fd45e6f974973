use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid structure: {0}")]
    InvalidStructure(String),

    #[error("invalid CPT for node `{node}`: {reason}")]
    InvalidCpt { node: String, reason: String },

    #[error("invalid mixture for node `{node}`: {reason}")]
    InvalidMixture { node: String, reason: String },

    #[error("dimension mismatch: expected {expected} entries, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("case has a missing entry for node `{0}`")]
    MissingEntry(String),

    #[error("state {state} out of range for node `{node}` with {cardinality} states")]
    StateOutOfRange {
        node: String,
        state: usize,
        cardinality: usize,
    },

    #[error("dataset is empty")]
    EmptyDataset,

    #[error("dataset does not match network: {0}")]
    DatasetMismatch(String),

    #[error("observed evidence has zero probability under the model")]
    ImpossibleEvidence,

    #[error("parent cap {cap} out of range for {candidates} candidate parents")]
    CapOutOfRange { cap: usize, candidates: usize },

    #[error("subset is not contained in the candidate parents: {0:?}")]
    NotASubset(Vec<usize>),

    #[error("negative count encountered")]
    NegativeCount,

    #[error("invalid prior: {0}")]
    InvalidPrior(String),

    #[error("zero denominator in weight update")]
    ZeroDenominator,

    #[error("size guard exceeded: {what} = {value} > {limit}")]
    GuardExceeded {
        what: &'static str,
        value: u128,
        limit: u128,
    },

    #[error("format error: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    /// True for errors raised by size guards rather than by bad input.
    pub fn is_guard(&self) -> bool {
        matches!(self, Error::GuardExceeded { .. })
    }
}
