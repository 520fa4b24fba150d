use thiserror::Error;

use crate::tuple::MAX_ARITY;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("arity {0} is outside the supported range 1..={MAX_ARITY}")]
    ArityOutOfRange(usize),

    #[error("arity mismatch: expected {expected}, found {found}")]
    ArityMismatch { expected: usize, found: usize },

    #[error("point {0} is mapped twice")]
    DuplicatePoint(String),

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("{what} needs {needed}, budget is {budget}")]
    BudgetExceeded {
        what: &'static str,
        needed: u128,
        budget: u128,
    },

    #[error("relation is not irredundant: {0}")]
    NotIrredundant(String),

    #[error("relation is empty")]
    EmptyRelation,

    #[error("consequent is not contained in the antecedent")]
    InvalidPair,

    #[error("unknown name `{0}`")]
    UnknownName(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("closure violation: {0}")]
    ClosureViolation(String),

    #[error("witness failed validation: {0}")]
    InvalidWitness(String),

    #[error("classification failed: {0}")]
    Classification(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
