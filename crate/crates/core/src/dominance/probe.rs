use serde::Serialize;

use crate::context::CandidateSet;
use crate::error::{Error, Result};
use crate::lp::{LinearProgram, LpOutcome, Relation};
use crate::rational::Rational;

use super::{uded_with, FiniteMechanism, MixedStrategy, UdedMode};

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ProbeReport {
    /// Smallest achievable `max_{t} |F^A_i(σ ⊔ t) − F^A_i(σ' ⊔ t)|`.
    pub epsilon: Rational,
    pub sigma: MixedStrategy,
    pub sigma_prime: MixedStrategy,
    pub uded: Vec<usize>,
    pub uded_prime: Vec<usize>,
    /// True when either undominated set kept strategies it could not decide.
    pub conservative: bool,
}

/// Minimizes the largest allocation gap between a mixture over `UDed_i(K)` and a
/// mixture over `UDed_i(K')`, uniformly over opponent profiles.
pub fn intersection_probe(
    m: &FiniteMechanism,
    i: usize,
    k: &CandidateSet,
    k_prime: &CandidateSet,
) -> Result<ProbeReport> {
    let common = k.intersection(k_prime);
    if common.len() < 2 {
        return Err(Error::HypothesisViolated(format!(
            "{k} and {k_prime} share {} value(s), at least two are required",
            common.len()
        )));
    }
    let a = uded_with(m, i, k, UdedMode::Full)?;
    let b = uded_with(m, i, k_prime, UdedMode::Full)?;
    let (na, nb) = (a.strategies.len(), b.strategies.len());
    // variables: σ over UDed(K), σ' over UDed(K'), then ε
    let nv = na + nb + 1;
    let mut lp = LinearProgram::new(nv);
    let mut obj = vec![Rational::zero(); nv];
    obj[nv - 1] = -Rational::one();
    lp.set_objective(obj);
    for t in 0..m.opponent_count(i) {
        let others = m.opponents(i, t);
        let mut row = vec![Rational::zero(); nv];
        for (j, &s) in a.strategies.iter().enumerate() {
            row[j] = m.alloc_at(m.join_index(i, s, &others))[i].clone();
        }
        for (j, &s) in b.strategies.iter().enumerate() {
            row[na + j] = -m.alloc_at(m.join_index(i, s, &others))[i].clone();
        }
        let mut upper = row.clone();
        upper[nv - 1] = -Rational::one();
        lp.add(upper, Relation::Le, Rational::zero());
        let mut lower: Vec<Rational> = row.iter().map(|x| -x).collect();
        lower[nv - 1] = -Rational::one();
        lp.add(lower, Relation::Le, Rational::zero());
    }
    let mut sum_a = vec![Rational::zero(); nv];
    let mut sum_b = vec![Rational::zero(); nv];
    for x in &mut sum_a[..na] {
        *x = Rational::one();
    }
    for x in &mut sum_b[na..na + nb] {
        *x = Rational::one();
    }
    lp.add(sum_a, Relation::Eq, Rational::one());
    lp.add(sum_b, Relation::Eq, Rational::one());
    match lp.maximize() {
        LpOutcome::Optimal { value, x } => {
            let sigma = MixedStrategy::new(a.strategies.iter().copied().zip(x[..na].iter().cloned()))?;
            let sigma_prime =
                MixedStrategy::new(b.strategies.iter().copied().zip(x[na..na + nb].iter().cloned()))?;
            Ok(ProbeReport {
                epsilon: -value,
                sigma,
                sigma_prime,
                conservative: !a.undecided.is_empty() || !b.undecided.is_empty(),
                uded: a.strategies,
                uded_prime: b.strategies,
            })
        }
        other => Err(Error::Lp(format!("intersection program ended as {other:?}"))),
    }
}
