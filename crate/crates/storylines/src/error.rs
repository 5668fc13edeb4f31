//! Crate-wide error type.
//!
//! Every variant carries enough context to print a single actionable line.
//! [`Error::is_internal`] separates invariant violations (bugs) from data and
//! usage problems so callers can map them to distinct exit codes.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("non-finite value at row {row}, column {col} ('{name}')")]
    NonFiniteValue {
        row: usize,
        col: usize,
        name: String,
    },

    #[error("constant column '{name}': all values equal {value}; drop it or run the screening step to select varying outputs")]
    ConstantColumn { name: String, value: f64 },

    #[error("duplicate column name '{name}'")]
    DuplicateColumn { name: String },

    #[error("empty column name at position {index}")]
    EmptyColumnName { index: usize },

    #[error("need at least 2 scenarios, got {n}")]
    TooFewScenarios { n: usize },

    #[error("need at least 1 column, got 0")]
    NoColumns,

    #[error("dimension mismatch: expected {expected} columns, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error(
        "row count mismatch: {left} vs {right} (scenario and uncertainty matrices must align)"
    )]
    RowCountMismatch { left: usize, right: usize },

    #[error("scenario id mismatch at row {row}: '{left}' vs '{right}'")]
    ScenarioIdMismatch {
        row: usize,
        left: String,
        right: String,
    },

    #[error("categorical column '{name}' has non-integer or negative code {value} at row {row}")]
    BadCategoricalCode {
        name: String,
        row: usize,
        value: f64,
    },

    #[error("cluster label {label} out of range for k={k}")]
    LabelOutOfRange { label: usize, k: usize },

    #[error("cluster count k={k} out of range (need 1 <= k <= {n})")]
    BadClusterCount { k: usize, n: usize },

    #[error("empty k range")]
    EmptyKRange,

    #[error("empty member set")]
    EmptyMemberSet,

    #[error("initial range for output '{name}' has zero width")]
    ZeroInitialRange { name: String },

    #[error("max_leaves must be >= {min}, got {got}")]
    BadLeafBudget { min: usize, got: usize },

    #[error("cluster {label} vanished after re-ordering; storyline semantics need every cluster populated (try a different k or seed)")]
    ClusterVanished { label: usize },

    #[error("no informative split: the tree cannot separate the labels on these features")]
    NoInformativeSplit,

    #[error("fold {fold} lacks cluster label {label}: stratification precondition violated (reduce folds or increase data)")]
    FoldMissingLabel { fold: usize, label: usize },

    #[error("fold count must be >= 2, got {got}")]
    BadFoldCount { got: usize },

    #[error("empty discovery curve")]
    EmptyCurve,

    #[error("threshold rule requires a single unit, found both '{first}' and '{second}'")]
    MixedUnits { first: String, second: String },

    #[error("csv parse error at data row {row}, column '{col}': {msg}")]
    CsvCell {
        row: usize,
        col: String,
        msg: String,
    },

    #[error("error in '{path}': {msg}")]
    CsvFile { path: String, msg: String },

    #[error("metadata references unknown column '{name}'")]
    UnknownMetadataColumn { name: String },

    #[error("invalid synthetic data spec: {0}")]
    BadSynthSpec(String),

    #[error("{0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("invalid tree document: {0}")]
    BadTreeDocument(String),

    #[error("internal invariant violated: {0}")]
    Internal(String),
}

impl Error {
    /// True for invariant violations that indicate a bug rather than bad input.
    pub fn is_internal(&self) -> bool {
        matches!(self, Error::Internal(_))
    }
}
