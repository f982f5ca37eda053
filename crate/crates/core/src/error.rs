use alloc::string::String;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum Error {
    #[error("explosion guard: {what} has {size} elements, cap is {cap}")]
    ExplosionGuard { what: String, size: u128, cap: u128 },
    #[error("invalid universe: {0}")]
    InvalidUniverse(String),
    #[error("measure for arity/coordinate {coordinate} is not normalized: weights sum to {sum}")]
    NotNormalized { coordinate: usize, sum: String },
    #[error("invalid measure: {0}")]
    InvalidMeasure(String),
    #[error("map is not injective")]
    NonInjective,
    #[error("hypothesis table has no entry at point code {0}")]
    MissingPoint(usize),
    #[error("invalid hypothesis: {0}")]
    InvalidHypothesis(String),
    #[error("invalid loss: {0}")]
    InvalidLoss(String),
    #[error("argument {0} outside [0, 1]")]
    DomainError(String),
    #[error("collection is not a cover: subset {witness:#b} is farther than the radius from every member")]
    NotACover { witness: u64 },
    #[error("hypothesis class is empty")]
    EmptyClass,
    #[error("target {target} is not realizable in the class")]
    NotRealizable { target: usize },
    #[error("budget exhausted: no sample size up to {cap} meets the criterion")]
    BudgetExhausted { cap: usize },
    #[error("subset formula produced a repeated element")]
    IndexCollision,
    #[error("partite hypothesis is not in the image of partization")]
    NotInImage,
    #[error("invalid centers: {0}")]
    InvalidCenters(String),
    #[error("precondition failed: {0}")]
    Precondition(String),
}
