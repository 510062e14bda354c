//! Exhaustive checkers for monotonicity, distinguishable monotonicity and δ-goodness.
//!
//! Work is split per (player, opponent subprofile) and scanned with rayon; the
//! reported witness is always the first one in enumeration order, so results do
//! not depend on the schedule.

use std::cmp::Ordering;
use std::fmt;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{domain, Result};
use crate::rational::Rational;

use super::optimal::d_delta;
use super::{join, AllocationRule};

/// A counterexample found by one of the checkers. Player indices are zero-based.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Witness {
    /// `f_i(lo ⊔ others) > f_i(hi ⊔ others)` although `lo < hi`.
    Monotone {
        player: usize,
        others: Vec<Rational>,
        lo: Rational,
        hi: Rational,
        f_lo: Rational,
        f_hi: Rational,
    },
    /// No opponent subprofile separates `bid` from `bid_prime`.
    NotDistinguishable { player: usize, bid: i64, bid_prime: i64 },
    /// The δ-goodness inequality fails at `bids` for `player`.
    NotDeltaGood {
        player: usize,
        bids: Vec<i64>,
        lhs: Rational,
        rhs: Rational,
    },
}

impl fmt::Display for Witness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Witness::Monotone { player, others, lo, hi, f_lo, f_hi } => write!(
                f,
                "player {}: f({lo}) = {f_lo} > f({hi}) = {f_hi} against others {others:?}",
                player + 1
            ),
            Witness::NotDistinguishable { player, bid, bid_prime } => write!(
                f,
                "player {}: bids {bid} and {bid_prime} are not distinguishable",
                player + 1
            ),
            Witness::NotDeltaGood { player, bids, lhs, rhs } => write!(
                f,
                "player {} at bids {bids:?}: {lhs} < {rhs}",
                player + 1
            ),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "result", content = "witness", rename_all = "snake_case")]
pub enum CheckOutcome {
    Pass,
    Fail(Witness),
}

impl CheckOutcome {
    pub fn is_pass(&self) -> bool {
        matches!(self, CheckOutcome::Pass)
    }

    pub fn witness(&self) -> Option<&Witness> {
        match self {
            CheckOutcome::Pass => None,
            CheckOutcome::Fail(w) => Some(w),
        }
    }
}

/// Decodes `index` into a profile of `len` entries drawn from `points`.
pub(crate) fn grid_profile<T: Clone>(points: &[T], len: usize, mut index: usize) -> Vec<T> {
    let base = points.len();
    let mut out = Vec::with_capacity(len);
    for _ in 0..len {
        out.push(points[index % base].clone());
        index /= base;
    }
    out.reverse();
    out
}

fn grid_count(base: usize, len: usize) -> usize {
    base.checked_pow(len as u32).expect("grid too large")
}

/// Checks `f_i(z ⊔ v_{−i}) ≤ f_i(z' ⊔ v_{−i})` for `z < z'` over the grid of
/// multiples of `grid_step`, the profile breakpoints, and midpoints between them.
pub fn check_monotone(f: &dyn AllocationRule, n: usize, bound: i64, grid_step: &Rational) -> Result<CheckOutcome> {
    if !grid_step.is_positive() {
        return Err(domain("grid step must be positive"));
    }
    let steps = Rational::int(bound).checked_div(grid_step)?;
    if !steps.is_integer() {
        return Err(domain(format!("grid step {grid_step} does not divide B = {bound}")));
    }
    let steps = steps.to_i64().expect("integer");
    let grid: Vec<Rational> = (0..=steps).map(|k| grid_step * Rational::int(k)).collect();
    let upper = Rational::int(bound);
    let per_player = grid_count(grid.len(), n - 1);
    let found = (0..n * per_player).into_par_iter().find_map_first(|task| {
        let i = task / per_player;
        let others = grid_profile(&grid, n - 1, task % per_player);
        let mut points = grid.clone();
        if let Ok(p) = f.profile(i, &others, &upper) {
            points.extend(p.breakpoints.iter().cloned());
        }
        points.sort();
        points.dedup();
        let mids: Vec<Rational> = points
            .windows(2)
            .map(|w| (&w[0] + &w[1]) * Rational::frac(1, 2))
            .collect();
        points.extend(mids);
        points.sort();
        let values: Vec<Rational> = points
            .iter()
            .map(|z| f.allocate(&join(z, &others, i))[i].clone())
            .collect();
        (1..points.len()).find(|&k| values[k - 1] > values[k]).map(|k| Witness::Monotone {
            player: i,
            others: others.clone(),
            lo: points[k - 1].clone(),
            hi: points[k].clone(),
            f_lo: values[k - 1].clone(),
            f_hi: values[k].clone(),
        })
    });
    Ok(found.map_or(CheckOutcome::Pass, CheckOutcome::Fail))
}

/// Checks that `f` is monotone and `d`-distinguishably monotone on `{0, …, B}`.
///
/// For every own-bid pair `v_i ≤ v_i' − d`, some integer subprofile `v_{−i}` must
/// make `∫_{v_i}^{v_i'} (f_i(z ⊔ v_{−i}) − f_i(v_i ⊔ v_{−i})) dz` strictly positive.
/// The subprofile `(v_i, …, v_i)` is tried first.
pub fn check_d_dm(f: &dyn AllocationRule, d: i64, n: usize, bound: i64) -> Result<CheckOutcome> {
    if d < 1 {
        return Err(domain("distinguishability distance must be at least 1"));
    }
    let mono = check_monotone(f, n, bound, &Rational::one())?;
    if !mono.is_pass() {
        return Ok(mono);
    }
    let grid: Vec<Rational> = (0..=bound).map(Rational::int).collect();
    let upper = Rational::int(bound);
    let per_player = grid_count(grid.len(), n - 1);
    for i in 0..n {
        // profile and integer point values for every opponent subprofile
        let tables: Vec<_> = (0..per_player)
            .into_par_iter()
            .map(|idx| {
                let others = grid_profile(&grid, n - 1, idx);
                let profile = f.profile(i, &others, &upper)?;
                let values: Vec<Rational> = grid
                    .iter()
                    .map(|z| f.allocate(&join(z, &others, i))[i].clone())
                    .collect();
                Ok((profile, values))
            })
            .collect::<Result<_>>()?;
        let pairs: Vec<(i64, i64)> = (0..=bound)
            .flat_map(|a| (a + d..=bound).map(move |b| (a, b)))
            .collect();
        let verdicts: Vec<Result<bool>> = pairs
            .par_iter()
            .map(|&(a, b)| {
                let diag = (0..n - 1).fold(0usize, |acc, _| acc * grid.len() + a as usize);
                let order = std::iter::once(diag).chain((0..per_player).filter(|&x| x != diag));
                let (za, zb) = (Rational::int(a), Rational::int(b));
                let mut undecided = None;
                for idx in order {
                    let (profile, values) = &tables[idx];
                    let base = &values[a as usize];
                    let gap = profile.integral(&za, &zb)? + (-(base * (&zb - &za)));
                    match gap.sign() {
                        Ok(Ordering::Greater) => return Ok(true),
                        Ok(_) => {}
                        Err(e) => undecided = Some(e),
                    }
                }
                match undecided {
                    Some(e) => Err(e),
                    None => Ok(false),
                }
            })
            .collect();
        for (&(a, b), verdict) in pairs.iter().zip(verdicts) {
            if !verdict? {
                return Ok(CheckOutcome::Fail(Witness::NotDistinguishable {
                    player: i,
                    bid: a,
                    bid_prime: b,
                }));
            }
        }
    }
    Ok(CheckOutcome::Pass)
}

/// Checks `Σ_j f_j(v)v_j + D_δ f_i(v)v_i ≥ v_i(n + D_δ)/n` for every integer
/// profile and player. A failure reports the largest violation, ties going to
/// the smallest player index and then the lexicographically smallest profile.
pub fn check_delta_good(f: &dyn AllocationRule, delta: &Rational, n: usize, bound: i64) -> Result<CheckOutcome> {
    let d = d_delta(delta)?;
    let grid: Vec<i64> = (0..=bound).collect();
    let total = grid_count(grid.len(), n);
    let nr = Rational::from(n);
    let worst = (0..total)
        .into_par_iter()
        .filter_map(|idx| {
            let v = grid_profile(&grid, n, idx);
            let vr: Vec<Rational> = v.iter().map(|&x| Rational::int(x)).collect();
            let alloc = f.allocate(&vr);
            let welfare: Rational = alloc.probs().iter().zip(&vr).map(|(p, x)| p * x).sum();
            let mut local: Option<(Rational, usize, Vec<i64>, Rational, Rational)> = None;
            for i in 0..n {
                let lhs = &welfare + &d * &alloc[i] * &vr[i];
                let rhs = &vr[i] * (&nr + &d) / &nr;
                if lhs < rhs {
                    let gap = &rhs - &lhs;
                    if local.as_ref().map_or(true, |l| gap > l.0) {
                        local = Some((gap, i, v.clone(), lhs, rhs));
                    }
                }
            }
            local
        })
        .reduce_with(|x, y| {
            let key = |t: &(Rational, usize, Vec<i64>, Rational, Rational)| (t.1, t.2.clone());
            match x.0.cmp(&y.0) {
                Ordering::Greater => x,
                Ordering::Less => y,
                Ordering::Equal => {
                    if key(&x) <= key(&y) {
                        x
                    } else {
                        y
                    }
                }
            }
        });
    Ok(match worst {
        None => CheckOutcome::Pass,
        Some((_, player, bids, lhs, rhs)) => CheckOutcome::Fail(Witness::NotDeltaGood { player, bids, lhs, rhs }),
    })
}
