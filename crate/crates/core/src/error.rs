use crate::instance::AlternativeId;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("instance has no alternatives")]
    NoAlternatives,
    #[error("instance has no voters")]
    NoVoters,
    #[error("alternative {id} has non-positive cost {cost}")]
    NonPositiveCost { id: AlternativeId, cost: String },
    #[error("alternative {id} costs {cost}, more than the whole budget")]
    CostExceedsBudget { id: AlternativeId, cost: String },
    #[error("common cost denominator does not fit in 128 bits")]
    CostScaleOverflow,
    #[error("voter {voter} has zero utility for the full set; cannot normalize")]
    UnnormalizableUtility { voter: usize },
    #[error("voter {voter}: {reason}")]
    InvalidOracle { voter: usize, reason: String },
    #[error("alternative {0} is already in the set")]
    AlreadyInSet(AlternativeId),
    #[error("unknown alternative {0}")]
    UnknownAlternative(AlternativeId),
    #[error("rankings do not cover the same group: {0}")]
    MismatchedGroup(String),
    #[error("mixing probability {0} is outside [0, 1]")]
    InvalidMix(f64),
    #[error("invalid FPTAS epsilon {0}; expected a value in (0, 1)")]
    InvalidEpsilon(f64),
    #[error("exact evaluation needs {needed} {what}, budget is {budget}; use Monte-Carlo mode")]
    ExceedsExactBudget {
        what: &'static str,
        needed: u128,
        budget: u128,
    },
    #[error("parse error: {0}")]
    Parse(String),
    #[error("invalid generator spec: {0}")]
    InvalidSpec(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
