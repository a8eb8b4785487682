use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// An argument fell outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// The operation is only defined for a different ground-space kind.
    #[error("unsupported ground space: {0}")]
    UnsupportedSpace(String),

    /// A caller-facing precondition was violated.
    #[error("precondition violated: {0}")]
    Precondition(String),

    /// Weights could not be expressed over a common denominator within the cap.
    #[error("unsupported weights: {0}")]
    UnsupportedWeights(String),

    /// No admissible cardinality with positive probability in the sup range.
    #[error("empty support: {0}")]
    EmptySupport(String),

    /// The requested radius lies above the admissible window.
    #[error("covering window violated: eps = {eps}, window edge = {edge}")]
    WindowViolation { eps: f64, edge: f64 },

    /// The concentration bound only applies for 1 <= p < 2.
    #[error("out of regime: {0}")]
    OutOfRegime(String),

    /// The tail fit is undefined for the given sample.
    #[error("degenerate fit: {0}")]
    DegenerateFit(String),

    /// A branching simulation exceeded the point budget.
    #[error("runaway cascade: generated more than {limit} points")]
    RunawayCascade { limit: u64 },

    /// Not enough usable rows for a regression.
    #[error("fit error: {0}")]
    Fit(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub fn precondition(msg: impl Into<String>) -> Self {
        Error::Precondition(msg.into())
    }
}
