//! Knightian dominance over tabulated finite mechanisms.
//!
//! A player with candidate set `K_i` compares strategies by expected utility
//! `F^A_i·θ_i − F^P_i` against every opponent profile and every `θ_i ∈ K_i`.
//! Utilities are affine in `θ_i`, so all relations are decided at
//! `θ_i ∈ {min K_i, max K_i}`.

mod mixed;
mod probe;
mod table;

use std::cmp::Ordering;
use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::context::CandidateSet;
use crate::error::{domain, Result};
use crate::price_expr::{precision_cap, PriceExpression};
use crate::rational::Rational;

pub use mixed::{mixed_dominator, mixed_dominator_among, uded, uded_with, UdedMode, UdedReport};
pub use probe::{intersection_probe, ProbeReport};
pub use table::{profile_count, FiniteMechanism};

/// A probability distribution over one player's pure strategies.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MixedStrategy {
    weights: BTreeMap<usize, Rational>,
}

impl MixedStrategy {
    pub fn new(weights: impl IntoIterator<Item = (usize, Rational)>) -> Result<Self> {
        let mut map = BTreeMap::new();
        for (s, w) in weights {
            if w.is_negative() {
                return Err(domain(format!("negative weight {w} on strategy {s}")));
            }
            if !w.is_zero() {
                *map.entry(s).or_insert_with(Rational::zero) += w;
            }
        }
        let total: Rational = map.values().sum();
        if total != Rational::one() {
            return Err(domain(format!("weights sum to {total}, not 1")));
        }
        Ok(MixedStrategy { weights: map })
    }

    pub fn pure(s: usize) -> Self {
        MixedStrategy {
            weights: BTreeMap::from([(s, Rational::one())]),
        }
    }

    /// Uniform mixture over the given strategies.
    pub fn uniform(support: &[usize]) -> Result<Self> {
        if support.is_empty() {
            return Err(domain("empty support"));
        }
        let w = Rational::frac(1, support.len() as i64);
        MixedStrategy::new(support.iter().map(|&s| (s, w.clone())))
    }

    pub fn weights(&self) -> &BTreeMap<usize, Rational> {
        &self.weights
    }

    pub fn support(&self) -> Vec<usize> {
        self.weights.keys().copied().collect()
    }

    pub fn as_pure(&self) -> Option<usize> {
        if self.weights.len() == 1 {
            self.weights.keys().next().copied()
        } else {
            None
        }
    }
}

/// Witnessing pair for a failed very-weak dominance: valuation and opponent profile.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "result", rename_all = "snake_case")]
pub enum Verdict {
    Holds,
    /// The dominating side is strictly worse at `(theta, others)`.
    Fails { theta: i64, others: Vec<usize> },
    /// Very-weak dominance holds but no pair is strict.
    NoStrictPair,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DominanceVerdict {
    pub verdict: Verdict,
    /// Largest interval precision a price comparison needed; 0 when every
    /// comparison was between rationals.
    pub precision_bits: u32,
}

impl DominanceVerdict {
    pub fn holds(&self) -> bool {
        self.verdict == Verdict::Holds
    }
}

/// `E u_i(θ_i, F(σ_i ⊔ t_{−i}))`.
pub fn expected_utility(
    m: &FiniteMechanism,
    i: usize,
    theta_i: &Rational,
    sigma: &MixedStrategy,
    others: &[usize],
) -> PriceExpression {
    let mut total = PriceExpression::zero();
    for (&s, w) in &sigma.weights {
        let idx = m.join_index(i, s, others);
        let gain = &m.alloc_at(idx)[i] * theta_i;
        let u = PriceExpression::rational(gain) - m.price_at(idx)[i].clone();
        total = total + u.scale(w);
    }
    total
}

/// `E u_i(σ) − u_i(s)` at one `(θ_i, t_{−i})`.
fn advantage(
    m: &FiniteMechanism,
    i: usize,
    theta: &Rational,
    sigma: &MixedStrategy,
    s: usize,
    others: &[usize],
) -> PriceExpression {
    expected_utility(m, i, theta, sigma, others) - expected_utility(m, i, theta, &MixedStrategy::pure(s), others)
}

fn endpoints(k: &CandidateSet) -> Vec<i64> {
    if k.min() == k.max() {
        vec![k.min()]
    } else {
        vec![k.min(), k.max()]
    }
}

fn check_indices(m: &FiniteMechanism, i: usize, sigma: &MixedStrategy, s: usize) -> Result<()> {
    if i >= m.players() {
        return Err(domain(format!("player {} out of range", i + 1)));
    }
    let count = m.strategies(i);
    if s >= count || sigma.weights.keys().any(|&x| x >= count) {
        return Err(domain(format!("strategy out of range for player {}", i + 1)));
    }
    Ok(())
}

fn scan(
    m: &FiniteMechanism,
    i: usize,
    thetas: &[i64],
    sigma: &MixedStrategy,
    s: usize,
    require_strict: bool,
) -> Result<DominanceVerdict> {
    check_indices(m, i, sigma, s)?;
    let cap = precision_cap();
    let mut bits = 0;
    let mut strict = false;
    for &theta in thetas {
        let th = Rational::int(theta);
        for k in 0..m.opponent_count(i) {
            let others = m.opponents(i, k);
            let (sign, used) = advantage(m, i, &th, sigma, s, &others).sign_detail(cap)?;
            bits = bits.max(used);
            match sign {
                Ordering::Less => {
                    return Ok(DominanceVerdict {
                        verdict: Verdict::Fails { theta, others },
                        precision_bits: bits,
                    })
                }
                Ordering::Greater => strict = true,
                Ordering::Equal => {}
            }
        }
    }
    let verdict = if require_strict && !strict {
        Verdict::NoStrictPair
    } else {
        Verdict::Holds
    };
    Ok(DominanceVerdict {
        verdict,
        precision_bits: bits,
    })
}

/// Whether `σ_i` very-weakly dominates `s_i` for a player with candidate set `K_i`.
pub fn very_weakly_dominates(
    m: &FiniteMechanism,
    i: usize,
    k: &CandidateSet,
    sigma: &MixedStrategy,
    s: usize,
) -> Result<DominanceVerdict> {
    scan(m, i, &endpoints(k), sigma, s, false)
}

/// Very-weak dominance scanned over every `θ_i ∈ K_i` rather than the endpoints.
pub fn very_weakly_dominates_full_scan(
    m: &FiniteMechanism,
    i: usize,
    k: &CandidateSet,
    sigma: &MixedStrategy,
    s: usize,
) -> Result<DominanceVerdict> {
    scan(m, i, k.values(), sigma, s, false)
}

/// Very-weak dominance plus at least one strict `(θ_i, t_{−i})`.
pub fn weakly_dominates(
    m: &FiniteMechanism,
    i: usize,
    k: &CandidateSet,
    sigma: &MixedStrategy,
    s: usize,
) -> Result<DominanceVerdict> {
    scan(m, i, &endpoints(k), sigma, s, true)
}

/// Pure strategies that very-weakly dominate every other pure strategy.
pub fn dnt(m: &FiniteMechanism, i: usize, k: &CandidateSet) -> Result<Vec<usize>> {
    let mut out = Vec::new();
    'candidates: for s in 0..m.strategies(i) {
        let sigma = MixedStrategy::pure(s);
        for t in 0..m.strategies(i) {
            if t != s && !very_weakly_dominates(m, i, k, &sigma, t)?.holds() {
                continue 'candidates;
            }
        }
        out.push(s);
    }
    Ok(out)
}
