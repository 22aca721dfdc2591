use thiserror::Error;

use crate::syntax::ParseError;

/// Errors raised anywhere in the grounding, solving and learning pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Parse(#[from] ParseError),

    #[error("unsafe rule `{rule}`: variable {var} does not occur in a positive body literal")]
    UnsafeRule { rule: String, var: String },

    #[error("predicate `{predicate}` used with arities {first} and {second}")]
    ArityClash {
        predicate: String,
        first: usize,
        second: usize,
    },

    #[error("predicate `{0}` already occurs in the program")]
    NameClash(String),

    #[error("grounding exceeded the budget of {budget} atoms")]
    AtomBudgetExceeded { budget: usize },

    #[error("more than {budget} answer sets")]
    ModelBudgetExceeded { budget: usize },

    #[error("weak constraint tail has non-integer {what} `{term}`")]
    NonIntegerWeight { what: &'static str, term: String },

    #[error("integer overflow while {0}")]
    Overflow(&'static str),

    #[error("context of example `{0}` contains a weak constraint")]
    WeakConstraintInContext(String),

    #[error("ordering refers to `{0}`, which is not a positive example")]
    OrderingOverNonPositive(String),

    #[error("duplicate example id `{0}`")]
    DuplicateExampleId(String),

    #[error("invalid example id `{0}`")]
    InvalidExampleId(String),

    #[error("equality orderings are only supported as brave orderings")]
    CautiousEquality,

    #[error("rule `{0}` is not in the hypothesis space")]
    NotInHypothesisSpace(String),

    #[error("meta program needs at least one example to test")]
    NoExamples,

    #[error("time limit exceeded")]
    Timeout,

    #[error("{0}")]
    Generator(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
