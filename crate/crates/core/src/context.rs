//! Knightian auction contexts: candidate sets, δ-intervals, outcomes and welfare.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::rational::Rational;

/// Rejects any δ outside the open unit interval.
pub fn check_delta(delta: &Rational) -> Result<()> {
    if delta.is_positive() && *delta < Rational::one() {
        Ok(())
    } else {
        Err(domain(format!("delta must lie in (0,1), got {delta}")))
    }
}

/// A nonempty sorted set of nonnegative integer valuations.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "Vec<i64>", into = "Vec<i64>")]
pub struct CandidateSet {
    values: Vec<i64>,
}

impl CandidateSet {
    pub fn new(mut values: Vec<i64>) -> Result<Self> {
        values.sort_unstable();
        values.dedup();
        if values.is_empty() {
            return Err(domain("candidate set is empty"));
        }
        if values[0] < 0 {
            return Err(domain(format!("candidate value {} is negative", values[0])));
        }
        Ok(CandidateSet { values })
    }

    /// The contiguous set `{lo, …, hi}`.
    pub fn interval(lo: i64, hi: i64) -> Result<Self> {
        if lo > hi {
            return Err(domain(format!("interval {{{lo}..{hi}}} is empty")));
        }
        CandidateSet::new((lo..=hi).collect())
    }

    pub fn singleton(v: i64) -> Result<Self> {
        CandidateSet::new(vec![v])
    }

    pub fn min(&self) -> i64 {
        self.values[0]
    }

    pub fn max(&self) -> i64 {
        *self.values.last().expect("nonempty")
    }

    pub fn values(&self) -> &[i64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn contains(&self, v: i64) -> bool {
        self.values.binary_search(&v).is_ok()
    }

    pub fn is_interval(&self) -> bool {
        (self.max() - self.min()) as usize + 1 == self.values.len()
    }

    pub fn inaccuracy(&self) -> Rational {
        inaccuracy(self)
    }

    /// Values shared with another set.
    pub fn intersection(&self, other: &CandidateSet) -> Vec<i64> {
        self.values
            .iter()
            .copied()
            .filter(|v| other.contains(*v))
            .collect()
    }
}

impl TryFrom<Vec<i64>> for CandidateSet {
    type Error = Error;
    fn try_from(v: Vec<i64>) -> Result<Self> {
        CandidateSet::new(v)
    }
}

impl From<CandidateSet> for Vec<i64> {
    fn from(k: CandidateSet) -> Self {
        k.values
    }
}

impl fmt::Display for CandidateSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_interval() && self.len() > 2 {
            write!(f, "{{{}..{}}}", self.min(), self.max())
        } else {
            let parts: Vec<String> = self.values.iter().map(|v| v.to_string()).collect();
            write!(f, "{{{}}}", parts.join(","))
        }
    }
}

impl fmt::Debug for CandidateSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// `(max − min)/(max + min)`, or 0 for `{0}`.
pub fn inaccuracy(k: &CandidateSet) -> Rational {
    let (lo, hi) = (k.min(), k.max());
    if lo + hi == 0 {
        Rational::zero()
    } else {
        Rational::frac(hi - lo, hi + lo)
    }
}

/// The integers in `[(1−δ)x, (1+δ)x] ∩ {0, …, B}`.
pub fn delta_interval(x: &Rational, delta: &Rational, bound: i64) -> Result<CandidateSet> {
    check_delta(delta)?;
    if x.is_negative() {
        return Err(domain(format!("center must be nonnegative, got {x}")));
    }
    let lo_r = (Rational::one() - delta) * x;
    let hi_r = (Rational::one() + delta) * x;
    let lo = lo_r.ceil_i64().max(0);
    let hi = hi_r.floor_i64().min(bound);
    if lo > hi {
        return Err(Error::EmptyInterval {
            lo: lo_r,
            hi: hi_r,
            bound,
        });
    }
    CandidateSet::interval(lo, hi)
}

/// Result of one run of a deterministic mechanism. `winner` is zero-based.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Outcome {
    pub winner: Option<usize>,
    pub prices: Vec<Rational>,
}

impl Outcome {
    pub fn unallocated(n: usize) -> Self {
        Outcome {
            winner: None,
            prices: vec![Rational::zero(); n],
        }
    }

    /// Quasi-linear utility of player `i` with valuation `theta_i`.
    pub fn utility(&self, i: usize, theta_i: &Rational) -> Rational {
        let gain = if self.winner == Some(i) {
            theta_i.clone()
        } else {
            Rational::zero()
        };
        gain - &self.prices[i]
    }
}

/// Per-player winning probabilities; entries in `[0,1]` summing to at most 1.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "AllocationWire", into = "AllocationWire")]
pub struct AllocationVector {
    probs: Vec<Rational>,
}

#[derive(Serialize, Deserialize)]
struct AllocationWire {
    probs: Vec<Rational>,
}

impl TryFrom<AllocationWire> for AllocationVector {
    type Error = Error;
    fn try_from(w: AllocationWire) -> Result<Self> {
        AllocationVector::new(w.probs)
    }
}

impl From<AllocationVector> for AllocationWire {
    fn from(a: AllocationVector) -> Self {
        AllocationWire { probs: a.probs }
    }
}

impl AllocationVector {
    pub fn new(probs: Vec<Rational>) -> Result<Self> {
        let one = Rational::one();
        if let Some((i, p)) = probs
            .iter()
            .enumerate()
            .find(|(_, p)| p.is_negative() || **p > one)
        {
            return Err(domain(format!("probability {p} of player {} outside [0,1]", i + 1)));
        }
        let total: Rational = probs.iter().sum();
        if total > one {
            return Err(domain(format!("probabilities sum to {total} > 1")));
        }
        Ok(AllocationVector { probs })
    }

    pub fn zeros(n: usize) -> Self {
        AllocationVector {
            probs: vec![Rational::zero(); n],
        }
    }

    /// The point mass on `winner`, or all zeros.
    pub fn point(n: usize, winner: Option<usize>) -> Self {
        let mut a = AllocationVector::zeros(n);
        if let Some(w) = winner {
            a.probs[w] = Rational::one();
        }
        a
    }

    pub fn probs(&self) -> &[Rational] {
        &self.probs
    }

    pub fn into_probs(self) -> Vec<Rational> {
        self.probs
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    pub fn total(&self) -> Rational {
        self.probs.iter().sum()
    }
}

impl std::ops::Index<usize> for AllocationVector {
    type Output = Rational;
    fn index(&self, i: usize) -> &Rational {
        &self.probs[i]
    }
}

/// `θ_winner`, or 0 when the good is unallocated.
pub fn social_welfare(theta: &[i64], outcome: &Outcome) -> Rational {
    outcome
        .winner
        .map_or_else(Rational::zero, |w| Rational::int(theta[w]))
}

/// `Σ_i Pr[i wins]·θ_i`.
pub fn expected_social_welfare(theta: &[i64], alloc: &AllocationVector) -> Rational {
    alloc
        .probs
        .iter()
        .zip(theta)
        .map(|(p, t)| p * Rational::int(*t))
        .sum()
}

pub fn max_social_welfare(theta: &[i64]) -> Rational {
    Rational::int(theta.iter().copied().max().unwrap_or(0))
}

/// A full Knightian context `(n, B, δ, K, θ)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Context {
    pub n: usize,
    #[serde(rename = "B")]
    pub bound: i64,
    pub delta: Rational,
    #[serde(rename = "K")]
    pub k: Vec<CandidateSet>,
    pub theta: Vec<i64>,
}

impl Context {
    /// Builds a context and rejects it unless every invariant holds.
    pub fn new(bound: i64, delta: Rational, k: Vec<CandidateSet>, theta: Vec<i64>) -> Result<Self> {
        let c = Context {
            n: k.len(),
            bound,
            delta,
            k,
            theta,
        };
        let problems = validate_context(&c);
        if problems.is_empty() {
            Ok(c)
        } else {
            Err(Error::Domain(problems.join("; ")))
        }
    }

    pub fn msw(&self) -> Rational {
        max_social_welfare(&self.theta)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let c: Context =
            serde_json::from_str(s).map_err(|e| domain(format!("invalid context JSON: {e}")))?;
        let problems = validate_context(&c);
        if problems.is_empty() {
            Ok(c)
        } else {
            Err(Error::Domain(problems.join("; ")))
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("context serializes")
    }
}

/// Every violated context invariant, with one-based player indices.
pub fn validate_context(c: &Context) -> Vec<String> {
    let mut out = Vec::new();
    if c.n == 0 {
        out.push("n must be at least 1".to_string());
    }
    if c.bound < 1 {
        out.push(format!("B must be a positive integer, got {}", c.bound));
    }
    if let Err(e) = check_delta(&c.delta) {
        out.push(e.to_string());
    }
    if c.k.len() != c.n {
        out.push(format!("K has {} entries, expected n = {}", c.k.len(), c.n));
    }
    if c.theta.len() != c.n {
        out.push(format!("theta has {} entries, expected n = {}", c.theta.len(), c.n));
    }
    for (i, k) in c.k.iter().enumerate() {
        let p = i + 1;
        if k.max() > c.bound {
            out.push(format!("K[{p}] exceeds B = {}", c.bound));
        }
        let d = k.inaccuracy();
        if d > c.delta {
            out.push(format!("K[{p}] has inaccuracy {d} > delta {}", c.delta));
        }
        if let Some(&t) = c.theta.get(i) {
            if !k.contains(t) {
                out.push(format!("theta[{p}] not in K[{p}]"));
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(p: i64, q: i64) -> Rational {
        Rational::frac(p, q)
    }

    #[test]
    fn delta_intervals() {
        let k = delta_interval(&r(3, 1), &r(1, 3), 100).unwrap();
        assert_eq!(k.values(), &[2, 3, 4]);
        let k = delta_interval(&r(20, 3), &r(1, 2), 10).unwrap();
        assert_eq!(k.values(), &[4, 5, 6, 7, 8, 9, 10]);
        assert!(delta_interval(&r(5, 1), &r(1, 100), 100).unwrap().contains(5));
        assert!(matches!(
            delta_interval(&r(1, 2), &r(1, 10), 10),
            Err(Error::EmptyInterval { .. })
        ));
        assert!(delta_interval(&r(3, 1), &r(1, 1), 10).is_err());
    }

    #[test]
    fn inaccuracy_values() {
        assert_eq!(inaccuracy(&CandidateSet::new(vec![2, 4]).unwrap()), r(1, 3));
        assert_eq!(inaccuracy(&CandidateSet::singleton(5).unwrap()), r(0, 1));
        assert_eq!(inaccuracy(&CandidateSet::singleton(0).unwrap()), r(0, 1));
    }

    #[test]
    fn welfare() {
        let o = Outcome {
            winner: Some(0),
            prices: vec![r(2, 1), r(0, 1)],
        };
        assert_eq!(social_welfare(&[10, 2], &o), r(10, 1));
        assert_eq!(social_welfare(&[10, 2], &Outcome::unallocated(2)), r(0, 1));
        let o = Outcome {
            winner: Some(2),
            prices: vec![r(0, 1); 3],
        };
        assert_eq!(social_welfare(&[3, 7, 5], &o), r(5, 1));
        assert_eq!(max_social_welfare(&[10, 2]), r(10, 1));
        assert_eq!(max_social_welfare(&[0, 0, 0]), r(0, 1));
        assert_eq!(max_social_welfare(&[3, 7, 5]), r(7, 1));
    }

    #[test]
    fn validation_messages() {
        let ok = Context {
            n: 2,
            bound: 10,
            delta: r(1, 3),
            k: vec![CandidateSet::interval(2, 4).unwrap(), CandidateSet::singleton(7).unwrap()],
            theta: vec![3, 7],
        };
        assert!(validate_context(&ok).is_empty());
        let mut bad = ok.clone();
        bad.theta[0] = 5;
        assert_eq!(validate_context(&bad), vec!["theta[1] not in K[1]".to_string()]);
        let mut wide = ok;
        wide.k[0] = CandidateSet::new(vec![2, 10]).unwrap();
        wide.theta[0] = 2;
        let v = validate_context(&wide);
        assert_eq!(v.len(), 1);
        assert!(v[0].contains("2/3"), "{v:?}");
    }

    #[test]
    fn context_json_round_trip() {
        let s = r#"{"n":2,"B":10,"delta":"1/2","K":[[4,5,6,7,8,9,10],[2,3,4]],"theta":[10,2]}"#;
        let c = Context::from_json(s).unwrap();
        assert_eq!(c.k[1].values(), &[2, 3, 4]);
        assert_eq!(c.to_json(), s);
        assert!(Context::from_json(r#"{"n":1,"B":10,"delta":"1/2","K":[[3]],"theta":[4]}"#).is_err());
    }

    #[test]
    fn allocation_vector_invariants() {
        assert!(AllocationVector::new(vec![r(1, 2), r(2, 3)]).is_err());
        assert!(AllocationVector::new(vec![r(-1, 2)]).is_err());
        let a = AllocationVector::new(vec![r(5, 8), r(0, 1)]).unwrap();
        assert_eq!(serde_json::to_string(&a).unwrap(), r#"{"probs":["5/8","0"]}"#);
    }
}
