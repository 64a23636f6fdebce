use thiserror::Error;

use crate::simplicial::MultiIndex;

#[derive(Debug, Error)]
pub enum Error {
    #[error("cannot compose: {0}")]
    Composition(String),

    #[error("invalid input: {0}")]
    Validation(String),

    #[error("direction count mismatch: {left} vs {right}")]
    DirectionMismatch { left: usize, right: usize },

    #[error("cell budget exceeded at {index}: {cells} cells (budget {budget})")]
    Budget {
        index: MultiIndex,
        cells: u128,
        budget: u64,
    },

    #[error("integrity check failed: {0}")]
    Integrity(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn is_budget(&self) -> bool {
        matches!(self, Error::Budget { .. })
    }
}

pub type Result<T> = std::result::Result<T, Error>;
