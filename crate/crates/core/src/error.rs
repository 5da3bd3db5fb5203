use num_bigint::BigUint;
use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid inventory: {0}")]
    InvalidInventory(String),

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    /// `violator` is the zero-based index of the piece that is at least half
    /// the total length.
    #[error("lengths do not form a polygon: side {} is at least half the perimeter", .violator + 1)]
    NotPolygonal { violator: usize },

    #[error("enumeration needs {required} outcomes but the budget is {budget}")]
    BudgetExceeded { required: BigUint, budget: u64 },
}

impl Error {
    pub(crate) fn params(msg: impl Into<String>) -> Self {
        Error::InvalidParams(msg.into())
    }

    pub(crate) fn inventory(msg: impl Into<String>) -> Self {
        Error::InvalidInventory(msg.into())
    }
}
