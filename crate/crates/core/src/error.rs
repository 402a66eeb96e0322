use thiserror::Error;

use crate::Estimate;

pub type Result<T, E = RcrtError> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RcrtError {
    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("moduli {a} and {b} are not co-prime")]
    NotCoprime { a: u64, b: u64 },

    #[error("product of moduli overflows 128-bit quotient arithmetic")]
    Overflow,

    #[error("length mismatch for {what}: expected {expected}, got {got}")]
    LengthMismatch {
        what: &'static str,
        expected: usize,
        got: usize,
    },

    #[error("invalid {name}: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("oracle budget exceeded: {0}")]
    BudgetExceeded(String),

    #[error("vote produced {found} distinct quotients, {needed} needed")]
    DegenerateVote {
        needed: usize,
        found: usize,
        partial: Vec<Estimate>,
    },
}

impl RcrtError {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        RcrtError::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}
