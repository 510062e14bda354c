//! Single-good mechanisms: second price, random assignment and the optimal
//! randomized mechanism built from `f^(δ)`.
//!
//! Every mechanism here is of the form `M_f`: an allocation rule `f` plus the
//! payment that makes it truthful in the single-parameter sense,
//! `F^P_i(v) = v_i·f_i(v) − ∫_0^{v_i} f_i(z ⊔ v_{−i}) dz`. Second price is the
//! special case where `f_i` is a step function of the own bid.

mod checks;
mod optimal;
mod piecewise;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::context::{check_delta, AllocationVector, Outcome};
use crate::error::{domain, Error, Result};
use crate::price_expr::PriceExpression;
use crate::rational::Rational;

pub use checks::{check_d_dm, check_delta_good, check_monotone, CheckOutcome, Witness};
pub use optimal::{candidate_winner_count, d_delta, f_delta, piecewise_profile};
pub use piecewise::PiecewiseAllocation;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum TieRule {
    /// The lowest-indexed maximal bidder wins.
    #[default]
    Lexicographic,
    /// Each maximal bidder wins with equal probability.
    UniformRandom,
}

impl FromStr for TieRule {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "lex" | "lexicographic" => Ok(TieRule::Lexicographic),
            "random" | "uniform" | "uniformrandom" => Ok(TieRule::UniformRandom),
            _ => Err(domain(format!("unknown tie rule {s:?}"))),
        }
    }
}

/// Result of the second-price mechanism.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SecondPriceResult {
    Deterministic(Outcome),
    /// Expected allocation and expected prices under uniform tie-breaking.
    Randomized {
        alloc: AllocationVector,
        expected_prices: Vec<Rational>,
    },
}

impl SecondPriceResult {
    pub fn allocation(&self) -> AllocationVector {
        match self {
            SecondPriceResult::Deterministic(o) => AllocationVector::point(o.prices.len(), o.winner),
            SecondPriceResult::Randomized { alloc, .. } => alloc.clone(),
        }
    }

    pub fn expected_prices(&self) -> &[Rational] {
        match self {
            SecondPriceResult::Deterministic(o) => &o.prices,
            SecondPriceResult::Randomized { expected_prices, .. } => expected_prices,
        }
    }
}

/// Highest bid wins and pays the highest competing bid.
pub fn second_price(v: &[Rational], tie: TieRule) -> SecondPriceResult {
    let n = v.len();
    let top = v.iter().max().cloned().unwrap_or_else(Rational::zero);
    let maximizers: Vec<usize> = (0..n).filter(|&i| v[i] == top).collect();
    let second = |i: usize| -> Rational {
        v.iter()
            .enumerate()
            .filter(|&(j, _)| j != i)
            .map(|(_, x)| x.clone())
            .max()
            .unwrap_or_else(Rational::zero)
    };
    match tie {
        TieRule::Lexicographic => {
            let w = maximizers[0];
            let mut prices = vec![Rational::zero(); n];
            prices[w] = second(w);
            SecondPriceResult::Deterministic(Outcome {
                winner: Some(w),
                prices,
            })
        }
        TieRule::UniformRandom => {
            let share = Rational::frac(1, maximizers.len() as i64);
            let mut probs = vec![Rational::zero(); n];
            let mut prices = vec![Rational::zero(); n];
            for &w in &maximizers {
                probs[w] = share.clone();
                prices[w] = &share * second(w);
            }
            SecondPriceResult::Randomized {
                alloc: AllocationVector::new(probs).expect("uniform shares"),
                expected_prices: prices,
            }
        }
    }
}

/// Gives the good to a uniformly random player at price zero.
pub fn random_assignment(n: usize) -> Result<AllocationVector> {
    if n == 0 {
        return Err(domain("random assignment needs at least one player"));
    }
    AllocationVector::new(vec![Rational::frac(1, n as i64); n])
}

/// An allocation rule that the checkers can evaluate.
pub trait AllocationRule: Sync {
    fn allocate(&self, v: &[Rational]) -> AllocationVector;

    /// Own-bid profile of player `i` against `others` (the other players' bids in
    /// player order) on `[0, bound]`.
    fn profile(&self, _i: usize, _others: &[Rational], _bound: &Rational) -> Result<PiecewiseAllocation> {
        Err(Error::NotIntegrable)
    }
}

impl<F> AllocationRule for F
where
    F: Fn(&[Rational]) -> AllocationVector + Sync,
{
    fn allocate(&self, v: &[Rational]) -> AllocationVector {
        self(v)
    }
}

/// One of the implemented mechanisms, all of the form `M_f`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Mechanism {
    SecondPrice(TieRule),
    RandomAssignment,
    /// `M_opt^(δ)`; `d` caches `D_δ`.
    Optimal { delta: Rational, d: Rational },
}

impl Mechanism {
    pub fn optimal(delta: Rational) -> Result<Self> {
        check_delta(&delta)?;
        let d = d_delta(&delta)?;
        Ok(Mechanism::Optimal { delta, d })
    }

    /// Short identifier used in reports and on the command line.
    pub fn id(&self) -> String {
        match self {
            Mechanism::SecondPrice(TieRule::Lexicographic) => "2p-lex".into(),
            Mechanism::SecondPrice(TieRule::UniformRandom) => "2p-random".into(),
            Mechanism::RandomAssignment => "random".into(),
            Mechanism::Optimal { delta, .. } => format!("opt({delta})"),
        }
    }

    /// Expected price `F^P_i(v)`.
    pub fn expected_price(&self, i: usize, v: &[Rational]) -> Result<PriceExpression> {
        let fi = self.allocate(v)[i].clone();
        let others = others_of(v, i);
        let bound = v[i].clone().max(Rational::one());
        let integral = self.profile(i, &others, &bound)?.integral(&Rational::zero(), &v[i])?;
        Ok(PriceExpression::rational(&v[i] * &fi) - integral)
    }

    /// Price paid conditional on winning, `F^P_i(v)/f_i(v)`.
    pub fn conditional_price(&self, i: usize, v: &[Rational]) -> Result<PriceExpression> {
        let fi = self.allocate(v)[i].clone();
        if fi.is_zero() {
            return Err(Error::ZeroWinProbability { player: i + 1 });
        }
        Ok(self.expected_price(i, v)?.scale(&fi.recip()?))
    }

    /// Expected prices of every player.
    pub fn expected_prices(&self, v: &[Rational]) -> Result<Vec<PriceExpression>> {
        (0..v.len()).map(|i| self.expected_price(i, v)).collect()
    }
}

impl fmt::Display for Mechanism {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.id())
    }
}

impl AllocationRule for Mechanism {
    fn allocate(&self, v: &[Rational]) -> AllocationVector {
        match self {
            Mechanism::SecondPrice(tie) => second_price(v, *tie).allocation(),
            Mechanism::RandomAssignment => random_assignment(v.len()).expect("nonempty profile"),
            Mechanism::Optimal { d, .. } => optimal::f_with_d(v, d),
        }
    }

    fn profile(&self, i: usize, others: &[Rational], bound: &Rational) -> Result<PiecewiseAllocation> {
        let n = others.len() + 1;
        match self {
            Mechanism::RandomAssignment => Ok(PiecewiseAllocation::constant(
                Rational::frac(1, n as i64),
                bound.clone(),
            )),
            Mechanism::SecondPrice(_) => {
                // zero below the highest competing bid, one above it
                let top = others.iter().max().cloned().unwrap_or_else(Rational::zero);
                if top.is_zero() {
                    Ok(PiecewiseAllocation::constant(Rational::one(), bound.clone()))
                } else if &top >= bound {
                    Ok(PiecewiseAllocation::constant(Rational::zero(), bound.clone()))
                } else {
                    Ok(PiecewiseAllocation {
                        breakpoints: vec![top],
                        pieces: vec![
                            (Rational::zero(), Rational::zero()),
                            (Rational::one(), Rational::zero()),
                        ],
                        upper: bound.clone(),
                    })
                }
            }
            Mechanism::Optimal { d, .. } => {
                let _ = i;
                Ok(optimal::profile_with_d(others, d, bound))
            }
        }
    }
}

/// Which price `price_opt` reports.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PriceKind {
    /// `F^P_i(v)`, always defined.
    Expected,
    /// `F^P_i(v)/f_i(v)`, defined only when `f_i(v) > 0`.
    Conditional,
}

/// Price of player `i` (zero-based) under `M_opt^(δ)` at bid profile `v`.
pub fn price_opt(i: usize, v: &[Rational], delta: &Rational, kind: PriceKind) -> Result<PriceExpression> {
    if i >= v.len() {
        return Err(domain(format!("player {} out of range", i + 1)));
    }
    let m = Mechanism::optimal(delta.clone())?;
    match kind {
        PriceKind::Expected => m.expected_price(i, v),
        PriceKind::Conditional => m.conditional_price(i, v),
    }
}

/// The bids of everyone except player `i`, in player order.
pub fn others_of<T: Clone>(v: &[T], i: usize) -> Vec<T> {
    v.iter()
        .enumerate()
        .filter(|&(j, _)| j != i)
        .map(|(_, x)| x.clone())
        .collect()
}

/// Inserts `z` at position `i`.
pub fn join<T: Clone>(z: &T, others: &[T], i: usize) -> Vec<T> {
    let mut v = Vec::with_capacity(others.len() + 1);
    v.extend_from_slice(&others[..i]);
    v.push(z.clone());
    v.extend_from_slice(&others[i..]);
    v
}

/// Integer bids as rationals.
pub fn bids(v: &[i64]) -> Vec<Rational> {
    v.iter().map(|&x| Rational::int(x)).collect()
}
