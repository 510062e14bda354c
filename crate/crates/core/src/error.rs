use thiserror::Error;

use crate::rational::Rational;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("division by zero")]
    DivisionByZero,

    #[error("cannot parse {input:?} at column {position}: {message}")]
    Parse {
        input: String,
        position: usize,
        message: String,
    },

    #[error("no integer lies in the interval [{lo}, {hi}] within 0..={bound}")]
    EmptyInterval {
        lo: Rational,
        hi: Rational,
        bound: i64,
    },

    #[error("{0}")]
    Domain(String),

    #[error("every bid is zero; no candidate winner exists")]
    AllZeroBids,

    #[error("player {player} wins with probability zero, the per-win price is undefined")]
    ZeroWinProbability { player: usize },

    #[error("comparison undecided at {bits} bits of precision")]
    UndecidableAtPrecision { bits: u32 },

    #[error("work of size {required} exceeds the budget of {budget}")]
    BudgetExceeded { required: u128, budget: u128 },

    #[error("hypothesis violated: {0}")]
    HypothesisViolated(String),

    #[error("mechanism is not truthful: {0}")]
    NotTruthful(String),

    #[error("allocation rule cannot be integrated in closed form")]
    NotIntegrable,

    #[error("invalid table: {0}")]
    InvalidTable(String),

    #[error("linear program: {0}")]
    Lp(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}
