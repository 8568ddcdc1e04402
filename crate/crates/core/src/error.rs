use thiserror::Error;

use crate::combinatorics::Partition;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid game configuration: {0}")]
    InvalidConfig(String),
    #[error("invalid allocation: {0}")]
    InvalidAllocation(String),
    #[error("invalid partition: {0}")]
    InvalidPartition(String),
    #[error("illegal guess: {0}")]
    IllegalGuess(String),
    #[error("illegal reveal: {0}")]
    IllegalReveal(String),
    #[error("discovery counts {0:?} are not nonincreasing")]
    NonMonotone(Vec<u32>),
    #[error("history is not consistent with the strategy: {0}")]
    InconsistentHistory(String),
    #[error("diagram size {size} outside 1..={max}")]
    SizeOutOfRange { size: u32, max: u32 },
    #[error("p-table has no entry for diagram {0:?}")]
    MissingDiagram(Vec<u32>),
    #[error("p-table entry for {diagram:?} is {value}, outside [0, 1]")]
    EntryOutOfRange { diagram: Vec<u32>, value: String },
    #[error("scaled entry for diagram {diagram} is {value} > 1")]
    ExceedsUnit { diagram: Partition, value: String },
    #[error("strategy needs {needed} distinct doors but only {available} exist")]
    DoorBudget { needed: usize, available: usize },
    #[error("invalid p-table: {0}")]
    InvalidTable(String),
    #[error("invalid hider strategy: {0}")]
    InvalidHider(String),
    #[error("adversarial reveal is not supported here: {0}")]
    AdversarialRevealUnsupported(String),
    #[error("{what} budget of {limit} exceeded")]
    BudgetExceeded { what: &'static str, limit: u64 },
    #[error("internal error: {0}")]
    Internal(String),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
