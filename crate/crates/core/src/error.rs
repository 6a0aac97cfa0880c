use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("e-value vector must contain at least one entry")]
    Empty,
    #[error("entry {index} is negative ({value})")]
    Negative { index: usize, value: f64 },
    #[error("entry {index} is not a number")]
    NotANumber { index: usize },
    #[error("value {0} is not a nonnegative extended real")]
    InvalidValue(f64),
    #[error("betting fraction {0} is outside [0, 1]")]
    LambdaOutOfRange(f64),
    #[error("significance level {0} is outside (0, 1)")]
    AlphaOutOfRange(f64),
    #[error("tolerance must be positive, got {0}")]
    InvalidTolerance(f64),
    #[error("index k = {k} is outside 0..{n}")]
    IndexOutOfRange { k: usize, n: usize },
    #[error("{0}")]
    InfiniteEntry(&'static str),
    #[error("objective has a zero factor at λ = {0}")]
    ZeroFactor(f64),
    #[error("subset enumeration refused for n = {n} (limit {limit})")]
    TooLarge { n: usize, limit: usize },
    #[error("strategy has {got} entries but the vector has {expected}")]
    StrategyLength { expected: usize, got: usize },
    #[error("invalid scenario: {0}")]
    Scenario(String),
    #[error("finite support has {count} outcomes (limit {limit})")]
    SupportTooLarge { count: u128, limit: u128 },
    #[error("replication count must be at least 1")]
    NoReplications,
}
