use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("header mismatch: expected {expected:?}, found {found:?}")]
    HeaderMismatch { expected: Vec<String>, found: Vec<String> },

    #[error("line {line}: expected {expected} cells, found {found}")]
    RowArity { line: u64, expected: usize, found: usize },

    #[error("line {line}, column {column} ({attribute}): cannot parse {value:?} as {kind}")]
    ParseCell {
        line: u64,
        column: usize,
        attribute: String,
        value: String,
        kind: &'static str,
    },

    #[error("unknown attribute {0:?}")]
    UnknownAttribute(String),

    #[error("duplicate attribute {0:?}")]
    DuplicateAttribute(String),

    #[error("invalid hierarchy for {attribute:?}: {reason}")]
    InvalidHierarchy { attribute: String, reason: String },

    #[error("hierarchy for {attribute:?} has no mapping for value {value:?}")]
    UnmappedValue { attribute: String, value: String },

    #[error("level {level} out of range for {attribute:?} (max {max})")]
    LevelOutOfRange { attribute: String, level: usize, max: usize },

    #[error("attribute {attribute:?} is not numeric (row {row})")]
    NonNumeric { attribute: String, row: usize },

    #[error("table is empty")]
    EmptyTable,

    #[error("partition has no equivalence classes")]
    EmptyPartition,

    #[error(
        "no feasible lattice node: best k reached is {best_k}, \
         least suppression needed is {min_suppressed} of {rows} rows"
    )]
    NoFeasibleNode { best_k: usize, min_suppressed: usize, rows: usize },

    #[error("original value for group {key:?} is zero; normalized error undefined")]
    ZeroNormalization { key: String },

    #[error("group {key:?} has no matching anonymized group")]
    UnmatchedGroup { key: String },

    #[error("group {key:?} matches several anonymized groups")]
    AmbiguousGroup { key: String },

    #[error("value {value} outside domain of size {domain_size}")]
    OutsideDomain { value: usize, domain_size: usize },

    #[error("spending ε = {requested} exceeds remaining budget {remaining}")]
    BudgetExceeded { requested: f64, remaining: f64 },

    #[error("release limit of {limit} reached")]
    ReleaseLimit { limit: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}
