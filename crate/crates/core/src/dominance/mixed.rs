//! Weak dominance by mixed strategies, decided with an exact LP.

use std::cmp::Ordering;

use rayon::prelude::*;
use serde::Serialize;

use crate::context::CandidateSet;
use crate::error::{Error, Result};
use crate::interval::Interval;
use crate::lp::{LinearProgram, LpOutcome, Relation};
use crate::price_expr::{precision_cap, PriceExpression};
use crate::rational::Rational;

use super::{endpoints, weakly_dominates, FiniteMechanism, MixedStrategy};

const BOUND_BITS: u32 = 96;

/// Utilities of every pure strategy of one player at every `(θ endpoint, t_{−i})`.
struct UtilityGrid {
    /// `u[s][p]`
    u: Vec<Vec<PriceExpression>>,
    /// enclosures of `u`, present only when some price is irrational
    enc: Option<Vec<Vec<Interval>>>,
}

impl UtilityGrid {
    fn build(m: &FiniteMechanism, i: usize, k: &CandidateSet) -> Self {
        let thetas = endpoints(k);
        let opp = m.opponent_count(i);
        let pairs: Vec<(Rational, Vec<usize>)> = thetas
            .iter()
            .flat_map(|&th| (0..opp).map(move |t| (Rational::int(th), t)))
            .map(|(th, t)| (th, m.opponents(i, t)))
            .collect();
        let u: Vec<Vec<PriceExpression>> = (0..m.strategies(i))
            .into_par_iter()
            .map(|s| {
                pairs
                    .iter()
                    .map(|(th, others)| {
                        let idx = m.join_index(i, s, others);
                        PriceExpression::rational(&m.alloc_at(idx)[i] * th) - m.price_at(idx)[i].clone()
                    })
                    .collect()
            })
            .collect();
        let exact = u.iter().flatten().all(PriceExpression::is_rational);
        let enc = (!exact).then(|| {
            u.par_iter()
                .map(|row| row.iter().map(|x| x.enclose(BOUND_BITS)).collect())
                .collect()
        });
        UtilityGrid { u, enc }
    }

    fn pairs(&self) -> usize {
        self.u.first().map_or(0, Vec::len)
    }

    /// A rational lower bound on `u[c][p] − u[s][p]` that is exact when the
    /// difference is rational and positive when the difference is positive.
    fn lower_bound(&self, c: usize, s: usize, p: usize) -> Result<Rational> {
        let (a, b) = (&self.u[c][p], &self.u[s][p]);
        if let (Some(x), Some(y)) = (a.as_rational(), b.as_rational()) {
            return Ok(x - y);
        }
        let d = a - b;
        if let Some(r) = d.as_rational() {
            return Ok(r.clone());
        }
        let enc = self.enc.as_ref().expect("enclosures exist for irrational utilities");
        let lb = &enc[c][p].lo - &enc[s][p].hi;
        if lb.is_positive() {
            return Ok(lb);
        }
        match d.sign_with_cap(precision_cap())? {
            Ordering::Greater => d.certified_lower_bound(BOUND_BITS, precision_cap()),
            _ => Ok(lb),
        }
    }
}

fn solve(
    grid: &UtilityGrid,
    s: usize,
    candidates: &[usize],
) -> Result<Option<Vec<(usize, Rational)>>> {
    let cands: Vec<usize> = candidates.iter().copied().filter(|&c| c != s).collect();
    if cands.is_empty() {
        return Ok(None);
    }
    let mut rows = Vec::with_capacity(grid.pairs());
    for p in 0..grid.pairs() {
        let row: Vec<Rational> = cands
            .iter()
            .map(|&c| grid.lower_bound(c, s, p))
            .collect::<Result<_>>()?;
        if row.iter().any(|x| !x.is_zero()) {
            rows.push(row);
        }
    }
    if rows.is_empty() {
        return Ok(None);
    }
    let nv = cands.len();
    // a pure candidate whose every bound is nonnegative and one positive needs no LP
    for (j, &c) in cands.iter().enumerate() {
        let col = rows.iter().map(|r| &r[j]);
        if col.clone().all(|x| !x.is_negative()) && col.clone().any(|x| x.is_positive()) {
            return Ok(Some(vec![(c, Rational::one())]));
        }
    }
    let mut lp = LinearProgram::new(nv);
    let mut obj = vec![Rational::zero(); nv];
    for row in &rows {
        for (o, x) in obj.iter_mut().zip(row) {
            *o += x;
        }
        lp.add(row.clone(), Relation::Ge, Rational::zero());
    }
    lp.set_objective(obj);
    lp.add(vec![Rational::one(); nv], Relation::Eq, Rational::one());
    match lp.maximize() {
        LpOutcome::Optimal { value, x } if value.is_positive() => Ok(Some(
            cands.into_iter().zip(x).filter(|(_, w)| !w.is_zero()).collect(),
        )),
        LpOutcome::Optimal { .. } | LpOutcome::Infeasible => Ok(None),
        LpOutcome::Unbounded => Err(Error::Lp("dominance program is unbounded".into())),
    }
}

fn certify(
    m: &FiniteMechanism,
    i: usize,
    k: &CandidateSet,
    s: usize,
    weights: Option<Vec<(usize, Rational)>>,
) -> Result<Option<MixedStrategy>> {
    let Some(w) = weights else { return Ok(None) };
    let sigma = MixedStrategy::new(w)?;
    if weakly_dominates(m, i, k, &sigma, s)?.holds() {
        Ok(Some(sigma))
    } else {
        Err(Error::Lp(format!(
            "dominance certificate for strategy {s} did not re-verify"
        )))
    }
}

/// A mixed strategy over `candidates` that weakly dominates `s`, if one exists.
pub fn mixed_dominator_among(
    m: &FiniteMechanism,
    i: usize,
    k: &CandidateSet,
    s: usize,
    candidates: &[usize],
) -> Result<Option<MixedStrategy>> {
    let grid = UtilityGrid::build(m, i, k);
    certify(m, i, k, s, solve(&grid, s, candidates)?)
}

/// A mixed strategy over all of `S_i` that weakly dominates `s`, if one exists.
pub fn mixed_dominator(
    m: &FiniteMechanism,
    i: usize,
    k: &CandidateSet,
    s: usize,
) -> Result<Option<MixedStrategy>> {
    let all: Vec<usize> = (0..m.strategies(i)).collect();
    mixed_dominator_among(m, i, k, s, &all)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum UdedMode {
    /// Every pure strategy is a candidate and a potential dominator.
    Full,
    /// Only strategies in `{min K − (d−1), …, max K + (d−1)}` are examined, both as
    /// candidates and as dominators. Valid for mechanisms over bids `{0, …, B}`
    /// whose allocation rule is `d`-distinguishably monotone.
    DmBox(i64),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct UdedReport {
    /// Undominated strategies, including any that could not be decided.
    pub strategies: Vec<usize>,
    /// Strategies kept only because a price comparison hit the precision cap.
    pub undecided: Vec<usize>,
}

/// Strategies of player `i` not weakly dominated by any mixed strategy.
pub fn uded(m: &FiniteMechanism, i: usize, k: &CandidateSet) -> Result<Vec<usize>> {
    Ok(uded_with(m, i, k, UdedMode::Full)?.strategies)
}

pub fn uded_with(m: &FiniteMechanism, i: usize, k: &CandidateSet, mode: UdedMode) -> Result<UdedReport> {
    let count = m.strategies(i) as i64;
    let pool: Vec<usize> = match mode {
        UdedMode::Full => (0..count as usize).collect(),
        UdedMode::DmBox(d) => {
            let lo = (k.min() - (d - 1)).max(0);
            let hi = (k.max() + (d - 1)).min(count - 1);
            (lo..=hi).map(|x| x as usize).collect()
        }
    };
    let grid = UtilityGrid::build(m, i, k);
    let results: Vec<(usize, Result<Option<Vec<(usize, Rational)>>>)> = pool
        .par_iter()
        .map(|&s| (s, solve(&grid, s, &pool)))
        .collect();
    let mut report = UdedReport {
        strategies: Vec::new(),
        undecided: Vec::new(),
    };
    for (s, r) in results {
        match r {
            Ok(w) => {
                if certify(m, i, k, s, w)?.is_none() {
                    report.strategies.push(s);
                }
            }
            Err(Error::UndecidableAtPrecision { .. }) => {
                report.strategies.push(s);
                report.undecided.push(s);
            }
            Err(e) => return Err(e),
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dominance::{very_weakly_dominates, Verdict};
    use crate::mechanisms::{Mechanism, TieRule};

    fn r(p: i64, q: i64) -> Rational {
        Rational::frac(p, q)
    }

    fn set(v: &[i64]) -> CandidateSet {
        CandidateSet::new(v.to_vec()).unwrap()
    }

    #[test]
    fn truthful_point_mass_dominates_underbid() {
        let m = FiniteMechanism::tabulate(&Mechanism::SecondPrice(TieRule::Lexicographic), 2, 10, 1 << 20).unwrap();
        let sigma = mixed_dominator(&m, 0, &set(&[5]), 3).unwrap().unwrap();
        assert!(weakly_dominates(&m, 0, &set(&[5]), &sigma, 3).unwrap().holds());
        let best = mixed_dominator_among(&m, 0, &set(&[5]), 3, &[5]).unwrap();
        assert_eq!(best, Some(MixedStrategy::pure(5)));
        // a dominant strategy is never weakly dominated
        assert_eq!(mixed_dominator(&m, 0, &set(&[5]), 5).unwrap(), None);
    }

    #[test]
    fn only_a_mixture_dominates() {
        // player 1 has three strategies, the opponent two; θ is fixed at 1
        // and prices are zero, so utility equals the winning probability
        let z = || PriceExpression::zero();
        let rows = [
            [r(1, 1), r(0, 1)],
            [r(0, 1), r(0, 1)],
            [r(0, 1), r(0, 1)],
            [r(1, 1), r(0, 1)],
            [r(1, 3), r(0, 1)],
            [r(1, 3), r(0, 1)],
        ];
        let alloc: Vec<Vec<Rational>> = rows.iter().map(|x| x.to_vec()).collect();
        let price = vec![vec![z(), z()]; 6];
        let m = FiniteMechanism::from_tables("toy", vec![3, 2], alloc, price).unwrap();
        let k = set(&[1]);
        for pure in [0, 1] {
            assert!(!weakly_dominates(&m, 0, &k, &MixedStrategy::pure(pure), 2).unwrap().holds());
        }
        let sigma = mixed_dominator(&m, 0, &k, 2).unwrap().expect("a mixture dominates");
        assert_eq!(sigma.support(), vec![0, 1]);
        assert_eq!(uded(&m, 0, &k).unwrap(), vec![0, 1]);
    }

    #[test]
    fn singleton_sets_under_second_price() {
        let lex = FiniteMechanism::tabulate(&Mechanism::SecondPrice(TieRule::Lexicographic), 2, 10, 1 << 20).unwrap();
        // the tie winner is indifferent to shading by one, the other player to raising by one
        assert_eq!(uded(&lex, 0, &set(&[5])).unwrap(), vec![4, 5]);
        assert_eq!(uded(&lex, 1, &set(&[5])).unwrap(), vec![5, 6]);
        let uniform = FiniteMechanism::tabulate(&Mechanism::SecondPrice(TieRule::UniformRandom), 2, 10, 1 << 20).unwrap();
        for i in 0..2 {
            assert_eq!(uded(&uniform, i, &set(&[5])).unwrap(), vec![5]);
        }
    }

    #[test]
    fn gapped_set_endpoints_are_incomparable() {
        let m = FiniteMechanism::tabulate(&Mechanism::SecondPrice(TieRule::Lexicographic), 2, 10, 1 << 20).unwrap();
        let k = set(&[3, 7]);
        let up = very_weakly_dominates(&m, 0, &k, &MixedStrategy::pure(7), 3).unwrap();
        let down = very_weakly_dominates(&m, 0, &k, &MixedStrategy::pure(3), 7).unwrap();
        // overbidding loses at θ = 3 and underbidding at θ = 7, both against a bid of 4
        assert_eq!(up.verdict, Verdict::Fails { theta: 3, others: vec![4] });
        assert_eq!(down.verdict, Verdict::Fails { theta: 7, others: vec![4] });
        let kept = uded(&m, 0, &k).unwrap();
        assert!(kept.contains(&3) || kept.contains(&7), "{kept:?}");
    }

    #[test]
    fn optimal_mechanism_box() {
        let m = FiniteMechanism::tabulate(&Mechanism::optimal(r(1, 3)).unwrap(), 2, 6, 1 << 20).unwrap();
        let k = CandidateSet::interval(3, 5).unwrap();
        let full = uded_with(&m, 0, &k, UdedMode::Full).unwrap();
        assert!(full.undecided.is_empty());
        assert!(!full.strategies.is_empty());
        assert!(full.strategies.iter().all(|&s| (3..=5).contains(&s)), "{full:?}");
        let boxed = uded_with(&m, 0, &k, UdedMode::DmBox(1)).unwrap();
        assert_eq!(boxed.strategies, full.strategies);
    }
}
