pub mod cli;
pub mod context;
pub mod dominance;
pub mod error;
pub mod interval;
pub mod lp;
pub mod mechanisms;
pub mod price_expr;
pub mod rational;
pub mod welfare;

pub use context::{AllocationVector, CandidateSet, Context, Outcome};
pub use error::{Error, Result};
pub use price_expr::PriceExpression;
pub use rational::Rational;
