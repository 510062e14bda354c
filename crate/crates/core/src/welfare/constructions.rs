//! Adversarial contexts behind the upper bounds, and an audit harness for
//! direct mechanisms whose players report interval candidate sets.

use rayon::prelude::*;
use serde::Serialize;

use crate::context::{check_delta, delta_interval, CandidateSet, Context};
use crate::dominance::{profile_count, very_weakly_dominates, FiniteMechanism, MixedStrategy, Verdict};
use crate::error::{domain, Error, Result};
use crate::mechanisms::{second_price, TieRule};
use crate::price_expr::PriceExpression;
use crate::rational::Rational;

use super::admissible_intervals;

/// How `y` is rounded in the second-price and optimal-mechanism construction.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub enum YRounding {
    /// `y = ⌊((1−δ)x + 2)/(1+δ)⌋`. At some parameters `δ[x] ∩ δ[y]` is a single
    /// integer, too few for the undominated sets to overlap.
    Floor,
    /// `y = ⌈((1−δ)x + 2)/(1+δ)⌉`. Then `(1+δ)y ≥ ⌈(1−δ)x⌉ + 1` and, for
    /// `B ≥ 5/δ`, `(1−δ)y ≤ ⌈(1−δ)x⌉`, so both sets contain `⌈(1−δ)x⌉` and
    /// `⌈(1−δ)x⌉ + 1`; the welfare slack stays within `4/B` because
    /// `(1+δ)x = B` exactly.
    #[default]
    Ceil,
}

/// `K = (δ[x], δ[y], …, δ[y])` with `x = B/(1+δ)`, and
/// `θ = (⌊(1+δ)x⌋, ⌈(1−δ)y⌉, …)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Theorem35Construction {
    pub x: Rational,
    pub y: Rational,
    pub rounding: YRounding,
    pub context: Context,
    /// `δ[x] ∩ δ[y]`
    pub shared_values: Vec<i64>,
}

impl Theorem35Construction {
    /// The same context with `δ[x]` and `θ = B` moved to `player`.
    pub fn context_at(&self, player: usize) -> Result<Context> {
        let c = &self.context;
        if player >= c.n {
            return Err(domain(format!("player {} out of range", player + 1)));
        }
        let mut k = c.k.clone();
        let mut theta = c.theta.clone();
        k.swap(0, player);
        theta.swap(0, player);
        Context::new(c.bound, c.delta.clone(), k, theta)
    }
}

pub fn theorem35_construction(n: usize, bound: i64, delta: &Rational) -> Result<Theorem35Construction> {
    theorem35_construction_with(n, bound, delta, YRounding::default())
}

pub fn theorem35_construction_with(
    n: usize,
    bound: i64,
    delta: &Rational,
    rounding: YRounding,
) -> Result<Theorem35Construction> {
    check_delta(delta)?;
    if n < 2 {
        return Err(domain("the construction needs at least two players"));
    }
    let one = Rational::one();
    if Rational::int(bound) * delta < Rational::int(5) {
        return Err(Error::HypothesisViolated(format!("B = {bound} is below 5/δ = {}", Rational::int(5) / delta)));
    }
    let x = Rational::int(bound) / (&one + delta);
    let raw = ((&one - delta) * &x + Rational::int(2)) / (&one + delta);
    let y = Rational::from(match rounding {
        YRounding::Floor => raw.floor(),
        YRounding::Ceil => raw.ceil(),
    });
    let kx = delta_interval(&x, delta, bound)?;
    let ky = delta_interval(&y, delta, bound)?;
    let theta_rest = ((&one - delta) * &y).ceil_i64();
    let top = ((&one + delta) * &x).floor_i64();
    let mut k = vec![kx.clone()];
    let mut theta = vec![top];
    for _ in 1..n {
        k.push(ky.clone());
        theta.push(theta_rest);
    }
    let context = Context::new(bound, delta.clone(), k, theta)?;
    Ok(Theorem35Construction {
        shared_values: kx.intersection(&ky),
        x,
        y,
        rounding,
        context,
    })
}

/// `K̂ = (δ[c], …, δ[c])` with `c = ⌊(3−δ)/(2δ)⌋ + 1`, and the context that
/// replaces player 1's set by `δ[B]` with `θ = (B, c, …, c)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Theorem1Construction {
    pub c: i64,
    pub k_hat: Vec<CandidateSet>,
    pub context: Context,
    /// `1/n + c/B`
    pub bound: Rational,
}

fn theorem1_c(bound: i64, delta: &Rational) -> Result<i64> {
    check_delta(delta)?;
    let t = (Rational::int(3) - delta) / (Rational::int(2) * delta);
    if Rational::int(bound) <= t {
        return Err(Error::HypothesisViolated(format!("B = {bound} must exceed (3−δ)/(2δ) = {t}")));
    }
    Ok(t.floor_i64() + 1)
}

/// The construction with `δ[B]` placed at `player`.
fn theorem1_at(n: usize, bound: i64, delta: &Rational, player: usize) -> Result<Theorem1Construction> {
    if n == 0 || player >= n {
        return Err(domain("player out of range"));
    }
    let c = theorem1_c(bound, delta)?;
    let kc = delta_interval(&Rational::int(c), delta, bound)?;
    let kb = delta_interval(&Rational::int(bound), delta, bound)?;
    let k_hat = vec![kc.clone(); n];
    let mut k = k_hat.clone();
    k[player] = kb;
    let mut theta = vec![c; n];
    theta[player] = bound;
    Ok(Theorem1Construction {
        c,
        k_hat,
        context: Context::new(bound, delta.clone(), k, theta)?,
        bound: Rational::frac(1, n as i64) + Rational::frac(c, bound),
    })
}

pub fn theorem1_construction(n: usize, bound: i64, delta: &Rational) -> Result<Theorem1Construction> {
    theorem1_at(n, bound, delta, 0)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum DirectKind {
    /// Ignores reports and assigns the good uniformly at random, free of charge.
    NaiveUniform,
    /// Second price, lexicographic ties, run on the midpoints of the reported intervals.
    MidpointSecondPrice,
}

/// A direct mechanism whose strategies are the admissible interval reports.
#[derive(Clone, Debug)]
pub struct DirectMechanism {
    pub kind: DirectKind,
    pub bound: i64,
    pub delta: Rational,
    pub table: FiniteMechanism,
    /// strategy index → reported set, shared by every player
    pub reports: Vec<CandidateSet>,
}

impl DirectMechanism {
    pub fn report_index(&self, k: &CandidateSet) -> Option<usize> {
        self.reports.iter().position(|r| r == k)
    }
}

pub fn direct_mechanism(kind: DirectKind, n: usize, bound: i64, delta: &Rational, budget: u128) -> Result<DirectMechanism> {
    if n == 0 {
        return Err(domain("n must be at least 1"));
    }
    let reports = admissible_intervals(bound, delta)?;
    let counts = vec![reports.len(); n];
    let total = profile_count(&counts).unwrap_or(u128::MAX);
    if total > budget {
        return Err(Error::BudgetExceeded { required: total, budget });
    }
    let mut alloc = Vec::with_capacity(total as usize);
    let mut price = Vec::with_capacity(total as usize);
    let mut profile = vec![0usize; n];
    for _ in 0..total {
        match kind {
            DirectKind::NaiveUniform => {
                alloc.push(vec![Rational::frac(1, n as i64); n]);
                price.push(vec![PriceExpression::zero(); n]);
            }
            DirectKind::MidpointSecondPrice => {
                let mids: Vec<Rational> = profile
                    .iter()
                    .map(|&s| {
                        let k = &reports[s];
                        Rational::frac(k.min() + k.max(), 2)
                    })
                    .collect();
                let res = second_price(&mids, TieRule::Lexicographic);
                alloc.push(res.allocation().into_probs());
                price.push(res.expected_prices().iter().cloned().map(PriceExpression::rational).collect());
            }
        }
        for pos in (0..n).rev() {
            profile[pos] += 1;
            if profile[pos] < reports.len() {
                break;
            }
            profile[pos] = 0;
        }
    }
    let id = match kind {
        DirectKind::NaiveUniform => "direct-uniform",
        DirectKind::MidpointSecondPrice => "direct-midpoint-2p",
    };
    Ok(DirectMechanism {
        kind,
        bound,
        delta: delta.clone(),
        table: FiniteMechanism::from_tables(id, counts, alloc, price)?,
        reports,
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct AuditReport {
    pub truthful: bool,
    pub claim1_holds: bool,
    pub claim1_violation: Option<String>,
    /// `E[SW]/MSW` under truthful reports on the construction
    pub ratio: Rational,
    pub bound: Rational,
    pub context: Context,
    pub passes: bool,
}

fn describe(reports: &[CandidateSet], others: &[usize]) -> String {
    let shown: Vec<String> = others.iter().map(|&s| reports[s].to_string()).collect();
    format!("[{}]", shown.join(", "))
}

/// Verifies truthful reporting, allocation invariance in the report's centre
/// between `c` and `B`, and the welfare bound on the construction.
pub fn theorem1_audit(direct: &DirectMechanism) -> Result<AuditReport> {
    let m = &direct.table;
    let n = m.players();
    let (bound, delta) = (direct.bound, &direct.delta);
    let c = theorem1_c(bound, delta)?;

    let jobs: Vec<(usize, usize)> = (0..n).flat_map(|i| (0..direct.reports.len()).map(move |k| (i, k))).collect();
    let failure = jobs
        .par_iter()
        .map(|&(i, k)| -> Result<Option<String>> {
            let truth = MixedStrategy::pure(k);
            let kset = &direct.reports[k];
            for t in 0..direct.reports.len() {
                if t == k {
                    continue;
                }
                if let Verdict::Fails { theta, others } = very_weakly_dominates(m, i, kset, &truth, t)?.verdict {
                    return Ok(Some(format!(
                        "player {} with K = {kset}: reporting {} beats the truthful report at θ = {theta} against {}",
                        i + 1,
                        direct.reports[t],
                        describe(&direct.reports, &others)
                    )));
                }
            }
            Ok(None)
        })
        .find_map_first(|r| match r {
            Ok(None) => None,
            other => Some(other),
        });
    match failure {
        Some(Ok(Some(w))) => return Err(Error::NotTruthful(w)),
        Some(Err(e)) => return Err(e),
        _ => {}
    }

    let index_of = |x: i64| -> Result<usize> {
        let set = delta_interval(&Rational::int(x), delta, bound)?;
        direct
            .report_index(&set)
            .ok_or_else(|| domain(format!("δ[{x}] = {set} is not a report")))
    };
    let mut claim1_violation = None;
    'outer: for i in 0..n {
        for x in c..bound {
            let (a, b) = (index_of(x)?, index_of(x + 1)?);
            for t in 0..m.opponent_count(i) {
                let others = m.opponents(i, t);
                let fa = &m.alloc_at(m.join_index(i, a, &others))[i];
                let fb = &m.alloc_at(m.join_index(i, b, &others))[i];
                if fa != fb {
                    claim1_violation = Some(format!(
                        "player {}: allocation {fa} at δ[{x}] but {fb} at δ[{}] against {}",
                        i + 1,
                        x + 1,
                        describe(&direct.reports, &others)
                    ));
                    break 'outer;
                }
            }
        }
    }

    // δ[B] goes to a player with the smallest allocation under K̂
    let kc = index_of(c)?;
    let hat = m.alloc(&vec![kc; n]);
    let j = (0..n).min_by(|&a, &b| hat[a].cmp(&hat[b])).expect("n ≥ 1");
    let cons = theorem1_at(n, bound, delta, j)?;
    let profile: Vec<usize> = cons
        .context
        .k
        .iter()
        .map(|k| direct.report_index(k).ok_or_else(|| domain(format!("{k} is not a report"))))
        .collect::<Result<_>>()?;
    let alloc = m.alloc(&profile);
    let sw: Rational = alloc.iter().zip(&cons.context.theta).map(|(p, &t)| p * Rational::int(t)).sum();
    let ratio = sw / cons.context.msw();
    let claim1_holds = claim1_violation.is_none();
    Ok(AuditReport {
        truthful: true,
        claim1_holds,
        claim1_violation,
        passes: claim1_holds && ratio <= cons.bound,
        ratio,
        bound: cons.bound,
        context: cons.context,
    })
}
