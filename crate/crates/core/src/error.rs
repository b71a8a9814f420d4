use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("rank mismatch: {left} vs {right}")]
    RankMismatch { left: usize, right: usize },

    #[error("operands live over different field configurations")]
    ConfigMismatch,

    #[error("invalid field configuration: `{field}` {reason}")]
    InvalidField { field: &'static str, reason: String },

    #[error("element is not invertible (exact zero)")]
    NotInvertible,

    #[error("precision too low: {0}")]
    PrecisionTooLow(String),

    #[error("term budget of {0} exceeded before reaching the requested precision")]
    TermBudgetExceeded(usize),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("no threshold certifiable on axis {axis} within horizon {horizon}")]
    HorizonExhausted { axis: usize, horizon: usize },

    #[error("bound on axis {axis} is not above term {index} of sequence {sequence}")]
    InvalidBound { axis: usize, sequence: usize, index: usize },

    #[error("invalid sequence: {0}")]
    InvalidSequence(String),

    #[error("tower too short: {have} levels, at least {required} needed (top degree {top_degree})")]
    TowerTooShort { have: usize, required: usize, top_degree: u32 },

    #[error("unknown variable `{0}`")]
    UnknownVariable(String),

    #[error("window too short: length {len}, need at least {min}")]
    TooShort { len: usize, min: usize },

    #[error("witness search needs {candidates} candidates, budget is {budget}")]
    SearchBudgetExceeded { candidates: u64, budget: u64 },

    #[error("no witness of degree <= {max_degree} with support <= {max_support}")]
    NoWitnessInBounds { max_degree: u32, max_support: usize },

    #[error("image sequence never becomes pseudo-convergent within the window")]
    OnsetNotFound,

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("no window index separates the Taylor terms")]
    NoSeparatingIndex,

    #[error("value obstruction: {0}")]
    ValueObstruction(String),

    #[error("not a unit: {0}")]
    NotAUnit(String),

    #[error("index {index} outside window of length {len}")]
    IndexOutOfWindow { index: usize, len: usize },

    #[error("witness check failed: {0}")]
    WitnessMismatch(String),

    #[error("cannot parse `{input}`: {reason}")]
    Parse { input: String, reason: String },
}

impl Error {
    pub(crate) fn parse(input: &str, reason: impl Into<String>) -> Self {
        Error::Parse { input: input.to_string(), reason: reason.into() }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
