use thiserror::Error;

use crate::subset::SellerSubset;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("instance too large: n = {n} exceeds the exhaustive-enumeration bound of {max} sellers")]
    TooLarge { n: usize, max: usize },

    #[error("subset {subset} is out of range for {n} sellers")]
    SubsetOutOfRange { subset: SellerSubset, n: usize },

    #[error("invalid valuation: {0}")]
    InvalidValuation(String),

    #[error("invalid instance: {0}")]
    InvalidInstance(String),

    #[error("invalid tie-break rule: {0}")]
    InvalidTieBreak(String),

    #[error("cannot compare a subset with itself ({0})")]
    EqualSubsets(SellerSubset),

    #[error("invalid ordering: {0}")]
    InvalidOrder(String),

    #[error("invalid strategy: {0}")]
    InvalidStrategy(String),

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("seller {0} is frozen and cannot act")]
    FrozenSeller(usize),

    #[error("seller {0} cannot accept a decrease at price 0")]
    AcceptAtZero(usize),

    #[error("valuation is not anonymous: v({first}) != v({second})")]
    NotAnonymous { first: SellerSubset, second: SellerSubset },

    #[error("anonymous valuation is not weakly concave: marginal increases at size {k}")]
    NotConcave { k: usize },

    #[error("work budget exceeded: {required} units required, budget is {budget} (set BAFO_WORK_BUDGET to raise it)")]
    BudgetExceeded { required: u128, budget: u64 },

    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    /// Process exit code used by the CLI for this error.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::BudgetExceeded { .. } => 3,
            _ => 2,
        }
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}
