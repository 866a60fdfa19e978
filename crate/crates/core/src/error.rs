use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum StabilityError {
    #[error("invalid curve: {0}")]
    InvalidCurve(String),
    #[error("invalid bundle: {0}")]
    InvalidBundle(String),
    #[error("invalid subcurve: {0}")]
    InvalidSubcurve(String),
    #[error("node {0} does not exist")]
    UnknownNode(usize),
    #[error("unknown component `{0}`")]
    UnknownComponent(String),
    #[error("node {0} does not separate the curve")]
    NotSeparating(usize),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("bundle and line bundle live on different curves")]
    CurveMismatch,
    #[error("decision mode unavailable: {0}")]
    DecisionModeUnavailable(String),
    #[error("invalid subsheaf type: {0}")]
    InvalidType(String),
    #[error("subsheaf type is not constant rank, ℓ-notions only admit constant-rank types")]
    InadmissibleType,
    #[error("declared χ = {declared} exceeds the certified upper bound {upper}")]
    ImplausibleChi { declared: i64, upper: i64 },
    #[error("invalid polarization: {0}")]
    InvalidPolarization(String),
    #[error("curve is not of compact type")]
    NotCompactType,
    #[error("block ℓ-semistability neither verified nor declared: {0}")]
    PreconditionUnverified(String),
    #[error("enumeration needs {needed} realizations, budget is {budget}")]
    BudgetExceeded { needed: u128, budget: u64 },
    #[error("total space is not regular at node(s) {0:?}")]
    NotRegular(Vec<usize>),
    #[error("special fiber is not destabilized: {0}")]
    NotDestabilized(String),
    #[error("no realization available: {0}")]
    RealizationUnavailable(String),
    #[error("twisting divisor must have non-zero total degree")]
    ZeroRelativeDegree,
    #[error("integer overflow in exact arithmetic")]
    Overflow,
}

pub type Result<T, E = StabilityError> = std::result::Result<T, E>;
