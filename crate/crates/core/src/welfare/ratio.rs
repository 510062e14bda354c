//! Exhaustive worst-case welfare over contexts and undominated profiles.
//!
//! A triple `(K, θ, v)` is feasible iff each coordinate is: `θ_j ∈ K_j` and `v_j`
//! is a permitted strategy for `K_j`. Feasibility therefore factors per player,
//! and the search runs over bid profiles `v` crossed with, for each player, the
//! valuations reachable from `v_j`. This visits exactly the feasible
//! `(v, θ)` pairs without enumerating `K` profiles.

use std::cmp::Ordering;
use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::Serialize;

use crate::context::{CandidateSet, Context};
use crate::dominance::{uded_with, FiniteMechanism, UdedMode};
use crate::error::{domain, Error, Result};
use crate::mechanisms::{bids, AllocationRule, Mechanism, TieRule};
use crate::rational::Rational;

use super::{admissible_intervals, bound_curves, context_count, theorem35_construction, Theorem35Construction};

/// For each player and bid, the reachable valuations and the smallest interval
/// witnessing each one.
struct Reach {
    /// `[player][bid] → θ → interval`
    map: Vec<Vec<BTreeMap<i64, CandidateSet>>>,
}

impl Reach {
    fn build(
        n: usize,
        bound: i64,
        intervals: &[CandidateSet],
        member: impl Fn(usize, usize, i64) -> bool,
    ) -> Reach {
        let mut order: Vec<usize> = (0..intervals.len()).collect();
        order.sort_by_key(|&k| {
            let set = &intervals[k];
            (set.len(), set.min())
        });
        let mut map = vec![vec![BTreeMap::new(); bound as usize + 1]; n];
        for (j, per_bid) in map.iter_mut().enumerate() {
            for &k in &order {
                for v in 0..=bound {
                    if member(j, k, v) {
                        for &t in intervals[k].values() {
                            per_bid[v as usize].entry(t).or_insert_with(|| intervals[k].clone());
                        }
                    }
                }
            }
        }
        Reach { map }
    }

    fn thetas(&self, j: usize, v: i64) -> Vec<i64> {
        self.map[j][v as usize].keys().copied().collect()
    }

    fn context(&self, bound: i64, delta: &Rational, v: &[i64], theta: &[i64]) -> Context {
        let k = v
            .iter()
            .zip(theta)
            .enumerate()
            .map(|(j, (&b, t))| self.map[j][b as usize][t].clone())
            .collect();
        Context::new(bound, delta.clone(), k, theta.to_vec()).expect("witness context is valid")
    }
}

/// Calls `visit` for each valuation profile in the product of `sets`, in
/// lexicographic order, stopping when it returns false.
fn for_each_product(sets: &[Vec<i64>], mut visit: impl FnMut(&[i64]) -> bool) {
    if sets.iter().any(Vec::is_empty) {
        return;
    }
    let mut idx = vec![0usize; sets.len()];
    let mut cur: Vec<i64> = sets.iter().map(|s| s[0]).collect();
    loop {
        if !visit(&cur) {
            return;
        }
        let mut pos = sets.len();
        loop {
            if pos == 0 {
                return;
            }
            pos -= 1;
            idx[pos] += 1;
            if idx[pos] < sets[pos].len() {
                cur[pos] = sets[pos][idx[pos]];
                break;
            }
            idx[pos] = 0;
            cur[pos] = sets[pos][0];
        }
    }
}

fn bid_profile(n: usize, bound: i64, mut index: usize) -> Vec<i64> {
    let base = bound as usize + 1;
    let mut v = vec![0i64; n];
    for slot in v.iter_mut().rev() {
        *slot = (index % base) as i64;
        index /= base;
    }
    v
}

fn bid_profiles(n: usize, bound: i64) -> usize {
    (bound as usize + 1).pow(n as u32)
}

/// Common-denominator integer form of a list of rationals.
fn integerize(values: &[Rational]) -> (Vec<i128>, i128) {
    let mut l = num_bigint::BigInt::from(1);
    for x in values {
        l = num_integer::Integer::lcm(&l, x.denom());
    }
    let lr = Rational::from(l.clone());
    let ints = values
        .iter()
        .map(|x| {
            let y = x * &lr;
            i128::try_from(y.numer().clone()).expect("value fits in i128")
        })
        .collect();
    (ints, i128::try_from(l).expect("denominator fits in i128"))
}

fn expected_welfare(alloc: &[Rational], theta: &[i64]) -> Rational {
    alloc.iter().zip(theta).map(|(p, &t)| p * Rational::int(t)).sum()
}

/// Worst ratio found, with a witness that re-evaluates to it.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RatioReport {
    pub ratio: Rational,
    pub witness_context: Context,
    pub witness_profile: Vec<usize>,
    pub mechanism_id: String,
    /// True when some undominated set kept strategies whose status could not be
    /// decided at the precision cap.
    pub conservative: bool,
}

impl RatioReport {
    /// Recomputes `E[SW]/MSW` on the witness.
    pub fn reevaluate(&self, m: &FiniteMechanism) -> Rational {
        let alloc = m.alloc(&self.witness_profile);
        expected_welfare(alloc, &self.witness_context.theta) / self.witness_context.msw()
    }
}

fn mode_box(mode: UdedMode, k: &CandidateSet, v: i64, bound: i64) -> bool {
    let d = match mode {
        UdedMode::Full => return (0..=bound).contains(&v),
        UdedMode::DmBox(d) => d,
    };
    (k.min() - (d - 1)).max(0) <= v && v <= (k.max() + (d - 1)).min(bound)
}

/// Undominated sets of every player for every admissible interval.
fn uded_tables(
    m: &FiniteMechanism,
    intervals: &[CandidateSet],
    mode: UdedMode,
) -> Result<(Vec<Vec<Vec<usize>>>, bool)> {
    let n = m.players();
    let jobs: Vec<(usize, usize)> = (0..n).flat_map(|j| (0..intervals.len()).map(move |k| (j, k))).collect();
    let reports: Vec<_> = jobs
        .par_iter()
        .map(|&(j, k)| uded_with(m, j, &intervals[k], mode))
        .collect::<Result<_>>()?;
    let mut out = vec![vec![Vec::new(); intervals.len()]; n];
    let mut conservative = false;
    for ((j, k), rep) in jobs.into_iter().zip(reports) {
        conservative |= !rep.undecided.is_empty();
        out[j][k] = rep.strategies;
    }
    Ok((out, conservative))
}

/// Minimum of `E[SW]/MSW` over every admissible interval context with positive
/// MSW and every pure profile in `UDed(K)`. Ties go to the lexicographically
/// smallest `(v, θ)`.
///
/// `mode` selects how undominated sets are computed; `DmBox(d)` is exact for
/// mechanisms whose allocation rule is `d`-distinguishably monotone.
pub fn worst_case_ratio(m: &FiniteMechanism, delta: &Rational, mode: UdedMode, budget: u128) -> Result<RatioReport> {
    let n = m.players();
    let bound = m.strategies(0) as i64 - 1;
    if m.strategy_counts().iter().any(|&c| c as i64 != bound + 1) {
        return Err(domain("worst-case search needs bids {0..B} for every player"));
    }
    let required = context_count(n, bound, delta)?;
    if required > budget {
        return Err(Error::BudgetExceeded { required, budget });
    }
    let intervals = admissible_intervals(bound, delta)?;
    let (tables, conservative) = uded_tables(m, &intervals, mode)?;
    let reach = Reach::build(n, bound, &intervals, |j, k, v| {
        tables[j][k].binary_search(&(v as usize)).is_ok()
    });
    let best = (0..bid_profiles(n, bound))
        .into_par_iter()
        .filter_map(|idx| {
            let v = bid_profile(n, bound, idx);
            let sets: Vec<Vec<i64>> = (0..n).map(|j| reach.thetas(j, v[j])).collect();
            let profile: Vec<usize> = v.iter().map(|&x| x as usize).collect();
            let alloc = m.alloc(&profile);
            let mut local: Option<(Rational, Vec<i64>)> = None;
            for_each_product(&sets, |theta| {
                let msw = *theta.iter().max().expect("n ≥ 1");
                if msw > 0 {
                    let ratio = expected_welfare(alloc, theta) / Rational::int(msw);
                    if local.as_ref().map_or(true, |(r, _)| ratio < *r) {
                        local = Some((ratio, theta.to_vec()));
                    }
                }
                true
            });
            local.map(|(r, t)| (r, v, t))
        })
        .reduce_with(|a, b| match a.0.cmp(&b.0) {
            Ordering::Less => a,
            Ordering::Greater => b,
            Ordering::Equal => {
                if (&a.1, &a.2) <= (&b.1, &b.2) {
                    a
                } else {
                    b
                }
            }
        })
        .ok_or_else(|| domain("no context with positive welfare"))?;
    let (ratio, v, theta) = best;
    Ok(RatioReport {
        ratio,
        witness_context: reach.context(bound, delta, &v, &theta),
        witness_profile: v.iter().map(|&x| x as usize).collect(),
        mechanism_id: m.id().to_string(),
        conservative,
    })
}

/// Worst `E[SW]/MSW` over `UDed(K_1) × … × UDed(K_n)` for one fixed context.
pub fn context_ratio(m: &FiniteMechanism, ctx: &Context, mode: UdedMode) -> Result<RatioReport> {
    if ctx.msw().is_zero() {
        return Err(domain("context has zero maximum welfare"));
    }
    let mut conservative = false;
    let mut sets = Vec::with_capacity(ctx.n);
    for (j, k) in ctx.k.iter().enumerate() {
        let rep = uded_with(m, j, k, mode)?;
        conservative |= !rep.undecided.is_empty();
        sets.push(rep.strategies.into_iter().map(|s| s as i64).collect::<Vec<_>>());
    }
    let mut best: Option<(Rational, Vec<usize>)> = None;
    for_each_product(&sets, |v| {
        let profile: Vec<usize> = v.iter().map(|&x| x as usize).collect();
        let ratio = expected_welfare(m.alloc(&profile), &ctx.theta) / ctx.msw();
        if best.as_ref().map_or(true, |(r, _)| ratio < *r) {
            best = Some((ratio, profile));
        }
        true
    });
    let (ratio, witness_profile) = best.ok_or_else(|| domain("an undominated set is empty"))?;
    Ok(RatioReport {
        ratio,
        witness_context: ctx.clone(),
        witness_profile,
        mechanism_id: m.id().to_string(),
        conservative,
    })
}

/// Which positive guarantee `verify_positive_theorem` checks.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum PositiveTheorem {
    /// Second price with lexicographic ties over the box `{min K − 1, …, max K + 1}`:
    /// `SW ≥ ((1−δ)/(1+δ))²·MSW − 2(1−δ)/(1+δ)`.
    SecondPriceLex,
    /// Second price with uniform ties over `{min K, …, max K}`:
    /// `E[SW] ≥ ((1−δ)/(1+δ))²·MSW`.
    SecondPriceRandom,
    /// `M_opt^(δ)` over `{min K, …, max K}`: `E[SW] ≥ ((1−δ)² + 4δ/n)/(1+δ)²·MSW`.
    Optimal,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct VerifyReport {
    pub theorem: PositiveTheorem,
    pub pass: bool,
    /// Number of feasible `(v, θ)` pairs examined.
    pub checked: u64,
    pub counterexample: Option<(Context, Vec<i64>)>,
}

/// Exhaustively checks a positive welfare guarantee over every admissible
/// interval context and every bid profile in the undominated box.
pub fn verify_positive_theorem(
    theorem: PositiveTheorem,
    n: usize,
    bound: i64,
    delta: &Rational,
    budget: u128,
) -> Result<VerifyReport> {
    let required = context_count(n, bound, delta)?;
    if required > budget {
        return Err(Error::BudgetExceeded { required, budget });
    }
    let curves = bound_curves(n, delta)?;
    let one = Rational::one();
    let (mech, d, factor, additive) = match theorem {
        PositiveTheorem::SecondPriceLex => (
            Mechanism::SecondPrice(TieRule::Lexicographic),
            2,
            curves.second_price,
            Rational::int(2) * (&one - delta) / (&one + delta),
        ),
        PositiveTheorem::SecondPriceRandom => (
            Mechanism::SecondPrice(TieRule::UniformRandom),
            1,
            curves.second_price,
            Rational::zero(),
        ),
        PositiveTheorem::Optimal => (Mechanism::optimal(delta.clone())?, 1, curves.opt, Rational::zero()),
    };
    let intervals = admissible_intervals(bound, delta)?;
    let mode = UdedMode::DmBox(d);
    let reach = Reach::build(n, bound, &intervals, |_, k, v| mode_box(mode, &intervals[k], v, bound));
    let results: Vec<(u64, Option<(Vec<i64>, Vec<i64>)>)> = (0..bid_profiles(n, bound))
        .into_par_iter()
        .map(|idx| {
            let v = bid_profile(n, bound, idx);
            let alloc = mech.allocate(&bids(&v));
            // L·Σ f_j θ_j ≥ L·c·max θ − L·a, all integers
            let mut terms: Vec<Rational> = alloc.probs().to_vec();
            terms.push(factor.clone());
            terms.push(additive.clone());
            let (ints, _) = integerize(&terms);
            let (f, c, a) = (&ints[..n], ints[n], ints[n + 1]);
            let sets: Vec<Vec<i64>> = (0..n).map(|j| reach.thetas(j, v[j])).collect();
            let mut checked = 0u64;
            let mut bad = None;
            for_each_product(&sets, |theta| {
                checked += 1;
                let sw: i128 = f.iter().zip(theta).map(|(x, &t)| x * t as i128).sum();
                let msw = *theta.iter().max().expect("n ≥ 1") as i128;
                if sw < c * msw - a {
                    bad = Some((v.clone(), theta.to_vec()));
                    return false;
                }
                true
            });
            (checked, bad)
        })
        .collect();
    let checked = results.iter().map(|r| r.0).sum();
    let counterexample = results
        .into_iter()
        .find_map(|r| r.1)
        .map(|(v, theta)| (reach.context(bound, delta, &v, &theta), v));
    Ok(VerifyReport {
        theorem,
        pass: counterexample.is_none(),
        checked,
        counterexample,
    })
}

/// Worst-case ratios of second price and `M_opt` checked against the upper caps
/// `curve + 4/B` and, for `M_opt`, the lower curve; the adversarial construction
/// must also land at or below each cap.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct BracketReport {
    pub second_price: RatioReport,
    pub second_price_on_construction: RatioReport,
    pub second_price_cap: Rational,
    pub optimal: RatioReport,
    pub optimal_on_construction: RatioReport,
    pub optimal_floor: Rational,
    pub optimal_cap: Rational,
    pub pass: bool,
}

/// Smallest ratio over every placement of the high candidate set.
fn construction_ratio(m: &FiniteMechanism, cons: &Theorem35Construction, mode: UdedMode) -> Result<RatioReport> {
    let mut best: Option<RatioReport> = None;
    for j in 0..cons.context.n {
        let rep = context_ratio(m, &cons.context_at(j)?, mode)?;
        if best.as_ref().map_or(true, |b| rep.ratio < b.ratio) {
            best = Some(rep);
        }
    }
    best.ok_or_else(|| domain("empty construction"))
}

pub fn bracket_check(n: usize, bound: i64, delta: &Rational, budget: u128) -> Result<BracketReport> {
    let curves = bound_curves(n, delta)?;
    let slack = Rational::frac(4, bound);
    let table_budget = budget.max(1);
    let sp = FiniteMechanism::tabulate(&Mechanism::SecondPrice(TieRule::Lexicographic), n, bound, table_budget)?;
    let opt = FiniteMechanism::tabulate(&Mechanism::optimal(delta.clone())?, n, bound, table_budget)?;
    let second_price = worst_case_ratio(&sp, delta, UdedMode::DmBox(2), budget)?;
    let optimal = worst_case_ratio(&opt, delta, UdedMode::DmBox(1), budget)?;
    let cons = theorem35_construction(n, bound, delta)?;
    let second_price_on_construction = construction_ratio(&sp, &cons, UdedMode::DmBox(2))?;
    let optimal_on_construction = construction_ratio(&opt, &cons, UdedMode::DmBox(1))?;
    let second_price_cap = &curves.second_price + &slack;
    let optimal_cap = &curves.opt + &slack;
    let pass = second_price.ratio <= second_price_cap
        && second_price_on_construction.ratio <= second_price_cap
        && optimal.ratio <= optimal_cap
        && optimal_on_construction.ratio <= optimal_cap
        && optimal.ratio >= curves.opt;
    Ok(BracketReport {
        second_price,
        second_price_on_construction,
        second_price_cap,
        optimal,
        optimal_on_construction,
        optimal_floor: curves.opt,
        optimal_cap,
        pass,
    })
}
