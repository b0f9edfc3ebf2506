use thiserror::Error;

use crate::lattice::LatticePoint;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected} coordinates, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("generators have gcd {0}, so no conductor exists")]
    NoConductor(u64),

    #[error("{0} is not a semigroup element")]
    NotInSemigroup(LatticePoint),

    #[error("not a good semigroup: {0}")]
    NotGood(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("not applicable: {0}")]
    NotApplicable(String),

    #[error("internal consistency failure: {0}")]
    Consistency(String),

    #[error("truncation order insufficient on branch {branch}: need at least {required}")]
    TruncationInsufficient { branch: usize, required: u32 },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
