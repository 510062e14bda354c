//! Welfare guarantees: closed-form curves, exhaustive worst-case search over
//! Knightian contexts, and the adversarial constructions behind the upper bounds.

mod constructions;
mod ratio;
mod sweep;

use num_bigint::BigInt;
use num_traits::One;
use serde::Serialize;

use crate::context::{check_delta, CandidateSet};
use crate::error::{domain, Error, Result};
use crate::interval::Interval;
use crate::rational::Rational;

pub use constructions::{
    direct_mechanism, theorem1_audit, theorem1_construction, theorem35_construction,
    theorem35_construction_with, AuditReport, DirectKind, DirectMechanism, Theorem1Construction,
    Theorem35Construction, YRounding,
};
pub use ratio::{
    bracket_check, context_ratio, verify_positive_theorem, worst_case_ratio, BracketReport, PositiveTheorem,
    RatioReport, VerifyReport,
};
pub use sweep::{read_csv, sweep_rows, write_csv, write_svg, SweepRow};

/// Guaranteed fraction of the maximum social welfare for each mechanism.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct BoundCurves {
    /// `1/n`
    pub random: Rational,
    /// `((1−δ)/(1+δ))²`
    pub second_price: Rational,
    /// `((1−δ)² + 4δ/n)/(1+δ)²`
    pub opt: Rational,
}

pub fn bound_curves(n: usize, delta: &Rational) -> Result<BoundCurves> {
    if n == 0 {
        return Err(domain("n must be at least 1"));
    }
    check_delta(delta)?;
    let one = Rational::one();
    let nr = Rational::from(n);
    let plus = (&one + delta).pow(2);
    let minus = (&one - delta).pow(2);
    Ok(BoundCurves {
        random: one.clone() / &nr,
        second_price: &minus / &plus,
        opt: (minus + Rational::int(4) * delta / &nr) / plus,
    })
}

/// Enclosure of the δ at which the second-price curve meets `1/n`, namely
/// `(√n − 1)/(√n + 1)`; a point interval when `n` is a perfect square.
/// `None` for `n = 1`, where the curves never cross inside `(0,1)`.
pub fn crossover_delta(n: usize) -> Result<Option<Interval>> {
    if n == 0 {
        return Err(domain("n must be at least 1"));
    }
    if n == 1 {
        return Ok(None);
    }
    let bits = 48usize;
    let scaled = BigInt::from(n) << (2 * bits);
    let root = scaled.sqrt();
    let grid = BigInt::one() << bits;
    let map = |s: Rational| (&s - Rational::one()) / (&s + Rational::one());
    let lo = Rational::from_bigints(root.clone(), grid.clone())?;
    if &root * &root == scaled {
        return Ok(Some(Interval::point(map(lo))));
    }
    let hi = Rational::from_bigints(root + 1, grid)?;
    Ok(Some(Interval::new(map(lo), map(hi))))
}

/// `(1−δ)/(1+δ)·v ≤ θ ≤ (1+δ)/(1−δ)·v`.
pub fn key_range_check(v: i64, theta: i64, delta: &Rational) -> bool {
    let one = Rational::one();
    let q = (&one - delta) / (&one + delta);
    let v = Rational::int(v);
    let t = Rational::int(theta);
    &q * &v <= t && &t * &q <= v
}

/// Every interval candidate set `{lo, …, hi} ⊆ {0, …, B}` with inaccuracy at most δ,
/// ordered by `(lo, hi)`.
pub fn admissible_intervals(bound: i64, delta: &Rational) -> Result<Vec<CandidateSet>> {
    check_delta(delta)?;
    let mut out = Vec::new();
    for lo in 0..=bound {
        for hi in lo..=bound {
            if lo + hi == 0 || Rational::int(hi - lo) <= delta * Rational::int(hi + lo) {
                out.push(CandidateSet::interval(lo, hi)?);
            }
        }
    }
    Ok(out)
}

/// Lazily enumerates `(K, θ)` profiles over admissible interval sets.
pub struct ContextIter {
    /// per player: every (interval, θ ∈ interval) pair
    options: Vec<(CandidateSet, i64)>,
    n: usize,
    next: Option<Vec<usize>>,
}

impl Iterator for ContextIter {
    type Item = (Vec<CandidateSet>, Vec<i64>);

    fn next(&mut self) -> Option<Self::Item> {
        let cur = self.next.take()?;
        let item = (
            cur.iter().map(|&c| self.options[c].0.clone()).collect(),
            cur.iter().map(|&c| self.options[c].1).collect(),
        );
        let mut succ = cur;
        let mut pos = self.n;
        loop {
            if pos == 0 {
                break;
            }
            pos -= 1;
            succ[pos] += 1;
            if succ[pos] < self.options.len() {
                self.next = Some(succ);
                break;
            }
            succ[pos] = 0;
        }
        Some(item)
    }
}

/// Number of `(K, θ)` profiles `enumerate_contexts` would produce.
pub fn context_count(n: usize, bound: i64, delta: &Rational) -> Result<u128> {
    let per: u128 = admissible_intervals(bound, delta)?
        .iter()
        .map(|k| k.len() as u128)
        .sum();
    Ok(per.checked_pow(n as u32).unwrap_or(u128::MAX))
}

/// Every profile of admissible interval sets crossed with every `θ ∈ K`.
pub fn enumerate_contexts(n: usize, bound: i64, delta: &Rational, budget: u128) -> Result<ContextIter> {
    if n == 0 {
        return Err(domain("n must be at least 1"));
    }
    let required = context_count(n, bound, delta)?;
    if required > budget {
        return Err(Error::BudgetExceeded { required, budget });
    }
    let options: Vec<(CandidateSet, i64)> = admissible_intervals(bound, delta)?
        .into_iter()
        .flat_map(|k| k.values().to_vec().into_iter().map(move |t| (k.clone(), t)))
        .collect();
    Ok(ContextIter {
        options,
        n,
        next: Some(vec![0; n]),
    })
}
