//! The allocation function `f^(δ)` and its own-bid line sweep.

use crate::context::{check_delta, AllocationVector};
use crate::error::{Error, Result};
use crate::rational::Rational;

use super::piecewise::PiecewiseAllocation;

/// `D_δ = ((1+δ)/(1−δ))² − 1`.
pub fn d_delta(delta: &Rational) -> Result<Rational> {
    check_delta(delta)?;
    let one = Rational::one();
    let q = (&one + delta) / (&one - delta);
    Ok(q.pow(2) - one)
}

/// Number of candidate winners `n*` and the bid threshold for a profile
/// sorted in non-increasing order.
pub fn candidate_winner_count(sorted: &[Rational], d: &Rational) -> Result<(usize, Rational)> {
    if sorted.iter().all(|z| z.is_zero()) {
        return Err(Error::AllZeroBids);
    }
    debug_assert!(sorted.windows(2).all(|w| w[0] >= w[1]), "profile not sorted");
    let mut sum = Rational::zero();
    for k in 1..=sorted.len() {
        sum += &sorted[k - 1];
        let t = &sum / (Rational::from(k) + d);
        let above = sorted[k - 1] > t;
        let below_next = sorted.get(k).map_or(true, |next| t >= *next);
        if above && below_next {
            return Ok((k, t));
        }
    }
    unreachable!("a positive profile always has a candidate-winner count")
}

/// `f^(δ)` at an arbitrary nonnegative rational profile.
pub fn f_delta(z: &[Rational], delta: &Rational) -> Result<AllocationVector> {
    let d = d_delta(delta)?;
    Ok(f_with_d(z, &d))
}

pub(crate) fn f_with_d(z: &[Rational], d: &Rational) -> AllocationVector {
    let n = z.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| z[b].cmp(&z[a]).then(a.cmp(&b)));
    let sorted: Vec<Rational> = order.iter().map(|&i| z[i].clone()).collect();
    let (n_star, _) = match candidate_winner_count(&sorted, d) {
        Ok(v) => v,
        Err(_) => return AllocationVector::zeros(n),
    };
    let s: Rational = sorted[..n_star].iter().sum();
    let nd = Rational::from(n) + d;
    let kd = Rational::from(n_star) + d;
    let scale = &nd / (Rational::from(n) * &kd * d);
    let mut probs = vec![Rational::zero(); n];
    for &i in &order[..n_star] {
        let zi = &z[i];
        probs[i] = &scale * (zi * &kd - &s) / zi;
    }
    AllocationVector::new(probs).expect("f^(δ) is an allocation function")
}

/// `z ↦ f^(δ)_i(z ⊔ others)` on `[0, bound]` as a piecewise `a + b/z` function.
pub fn piecewise_profile(others: &[Rational], delta: &Rational, bound: &Rational) -> Result<PiecewiseAllocation> {
    let d = d_delta(delta)?;
    Ok(profile_with_d(others, &d, bound))
}

pub(crate) fn profile_with_d(others: &[Rational], d: &Rational, bound: &Rational) -> PiecewiseAllocation {
    let n = others.len() + 1;
    let mut o = others.to_vec();
    o.sort_by(|a, b| b.cmp(a));
    let mut prefix = vec![Rational::zero()];
    for x in &o {
        let next = prefix.last().expect("nonempty") + x;
        prefix.push(next);
    }
    // entry threshold: the others' own bid threshold, 0 if they are all zero
    let entry = match candidate_winner_count(&o, d) {
        Ok((_, t)) => t,
        Err(_) => Rational::zero(),
    };
    let nr = Rational::from(n);
    let nd = &nr + d;
    let mut spans = Vec::new();
    if entry.is_positive() {
        spans.push((Rational::zero(), entry.clone().min(bound.clone()), Rational::zero(), Rational::zero()));
    }
    if &entry < bound {
        let mut winning = Vec::new();
        // m = number of other players that are also candidate winners
        for m in 0..n {
            let mr = Rational::from(m);
            let k = &mr + Rational::one() + d;
            let s = &prefix[m];
            let lower = match o.get(m) {
                Some(next) => next * &k - s,
                None => -s.clone(),
            };
            let own_above = if m == 0 {
                Rational::zero()
            } else {
                s / (&mr + d)
            };
            let lo = lower.max(own_above).max(entry.clone());
            let hi = if m == 0 {
                bound.clone()
            } else {
                (&o[m - 1] * &k - s).min(bound.clone())
            };
            if lo < hi {
                let denom = &nr * &k * d;
                let a = &nd * (&mr + d) / &denom;
                let b = -(&nd * s) / &denom;
                winning.push((lo, hi, a, b));
            }
        }
        winning.sort_by(|x, y| x.0.cmp(&y.0));
        debug_assert!(
            winning.windows(2).all(|w| w[0].1 == w[1].0),
            "line-sweep spans do not tile"
        );
        spans.extend(winning);
    }
    if spans.is_empty() {
        return PiecewiseAllocation::constant(Rational::zero(), bound.clone());
    }
    PiecewiseAllocation::from_spans(spans, bound.clone())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(p: i64, q: i64) -> Rational {
        Rational::frac(p, q)
    }

    fn ints(v: &[i64]) -> Vec<Rational> {
        v.iter().map(|&x| Rational::int(x)).collect()
    }

    #[test]
    fn spread_constant() {
        assert_eq!(d_delta(&r(1, 3)).unwrap(), r(3, 1));
        assert_eq!(d_delta(&r(1, 2)).unwrap(), r(8, 1));
        assert!(d_delta(&r(1, 1000)).unwrap() < r(5, 1000));
        assert!(d_delta(&r(0, 1)).is_err());
    }

    #[test]
    fn winner_counts() {
        let d = r(3, 1);
        assert_eq!(candidate_winner_count(&ints(&[10, 2]), &d).unwrap(), (1, r(10, 4)));
        assert_eq!(candidate_winner_count(&ints(&[10, 9, 1]), &d).unwrap(), (2, r(19, 5)));
        assert_eq!(candidate_winner_count(&ints(&[4, 4, 4]), &d).unwrap().0, 3);
        assert_eq!(candidate_winner_count(&ints(&[0, 0]), &d), Err(Error::AllZeroBids));
    }

    #[test]
    fn allocation_values() {
        let third = r(1, 3);
        assert_eq!(f_delta(&ints(&[10, 2]), &third).unwrap().probs(), &[r(5, 8), r(0, 1)]);
        assert_eq!(f_delta(&ints(&[7, 7]), &third).unwrap().probs(), &[r(1, 2), r(1, 2)]);
        let f = f_delta(&ints(&[10, 9, 1]), &third).unwrap();
        assert_eq!(f.probs(), &[r(31, 75), r(52, 135), r(0, 1)]);
        assert_eq!(f.total(), r(539, 675));
        assert_eq!(f_delta(&ints(&[0, 0, 0]), &third).unwrap().total(), r(0, 1));
    }

    #[test]
    fn sweep_against_opponent_two() {
        let p = piecewise_profile(&ints(&[2]), &r(1, 3), &r(10, 1)).unwrap();
        assert_eq!(p.breakpoints, vec![r(1, 2), r(8, 1)]);
        assert_eq!(
            p.pieces,
            vec![(r(0, 1), r(0, 1)), (r(2, 3), r(-1, 3)), (r(5, 8), r(0, 1))]
        );
    }

    #[test]
    fn sweep_against_zero_opponents() {
        let p = piecewise_profile(&ints(&[0, 0]), &r(1, 3), &r(10, 1)).unwrap();
        assert!(p.breakpoints.is_empty());
        // (1/n)(n+D)/(1+D) with n = 3, D = 3
        assert_eq!(p.pieces, vec![(r(1, 2), r(0, 1))]);
    }
}
