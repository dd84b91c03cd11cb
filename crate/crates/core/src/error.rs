use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("structure contains no canonical residues")]
    EmptyStructure,

    #[error("invalid partition: {0}")]
    Partition(String),

    #[error("mutation {site}: structure has {found}, mutation expects {expected}")]
    MutationConsistency { site: String, expected: char, found: char },

    #[error("malformed mutation `{0}`")]
    MutationSyntax(String),

    #[error("site {0} not present in structure")]
    UnknownSite(String),

    #[error("site {0} has no CA atom and cannot be scored")]
    Unscorable(String),

    #[error("no log-probability table for fingerprint `{fingerprint}` (order {order}, realized {realized})")]
    MissingTable {
        fingerprint: String,
        order: String,
        realized: String,
    },

    #[error("archive record {record}: {message}")]
    Archive { record: usize, message: String },

    #[error("archive record {record}, step {step}: probabilities sum to {sum}")]
    Normalization { record: usize, step: usize, sum: f64 },

    #[error("degenerate fit: {0}")]
    DegenerateFit(String),

    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    #[error("{0} is undefined for this input")]
    Undefined(&'static str),

    #[error("structures differ in composition: {0}")]
    CompositionMismatch(String),

    #[error("need at least {needed} distinct complexes, found {found}")]
    TooFewComplexes { needed: usize, found: usize },

    #[error("dataset: {0}")]
    Dataset(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
