//! Outward-rounded rational intervals and natural-logarithm enclosures.
//!
//! Endpoints are kept on a dyadic grid so that repeated evaluation does not blow
//! up the size of the underlying big integers.

use std::collections::HashMap;
use std::sync::{Mutex, OnceLock};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::rational::Rational;

/// A closed interval `[lo, hi]` with rational endpoints.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Interval {
    pub lo: Rational,
    pub hi: Rational,
}

impl Interval {
    pub fn new(lo: Rational, hi: Rational) -> Self {
        debug_assert!(lo <= hi, "inverted interval");
        Interval { lo, hi }
    }

    pub fn point(x: Rational) -> Self {
        Interval {
            lo: x.clone(),
            hi: x,
        }
    }

    pub fn width(&self) -> Rational {
        &self.hi - &self.lo
    }

    pub fn midpoint(&self) -> Rational {
        (&self.lo + &self.hi) * Rational::frac(1, 2)
    }

    pub fn contains(&self, x: &Rational) -> bool {
        &self.lo <= x && x <= &self.hi
    }

    pub fn add(&self, other: &Interval) -> Interval {
        Interval {
            lo: &self.lo + &other.lo,
            hi: &self.hi + &other.hi,
        }
    }

    pub fn shift(&self, by: &Rational) -> Interval {
        Interval {
            lo: &self.lo + by,
            hi: &self.hi + by,
        }
    }

    /// Multiplication by an exact scalar.
    pub fn scale(&self, by: &Rational) -> Interval {
        let a = &self.lo * by;
        let b = &self.hi * by;
        if by.is_negative() {
            Interval { lo: b, hi: a }
        } else {
            Interval { lo: a, hi: b }
        }
    }

    /// Rounds both endpoints outward onto the grid `2^-bits`.
    pub fn round_outward(&self, bits: u32) -> Interval {
        Interval {
            lo: round_down(&self.lo, bits),
            hi: round_up(&self.hi, bits),
        }
    }
}

fn grid(bits: u32) -> BigInt {
    BigInt::one() << bits as usize
}

pub fn round_down(x: &Rational, bits: u32) -> Rational {
    let g = grid(bits);
    let scaled = x.as_big() * BigRational::from_integer(g.clone());
    Rational::from_big(BigRational::new(scaled.floor().to_integer(), g))
}

pub fn round_up(x: &Rational, bits: u32) -> Rational {
    let g = grid(bits);
    let scaled = x.as_big() * BigRational::from_integer(g.clone());
    Rational::from_big(BigRational::new(scaled.ceil().to_integer(), g))
}

/// Number of bits in the integer part of `|x|`, i.e. a crude `log2` upper bound.
pub fn magnitude_bits(x: &Rational) -> u32 {
    let q = x.abs().ceil();
    q.bits() as u32
}

/// `atanh(y)` for rational `0 <= y <= 1/3`, enclosed to width at most `2^-bits`.
fn atanh_small(y: &BigRational, bits: u32) -> Interval {
    if y.is_zero() {
        return Interval::point(Rational::zero());
    }
    let guard = bits + 8;
    let y2 = y * y;
    let mut power = y.clone();
    let mut lo_sum = BigRational::zero();
    let mut terms: u64 = 0;
    let target = BigRational::new(BigInt::one(), grid(bits + 2));
    let one = BigRational::one();
    let tail_factor = &one / (&one - &y2);
    let mut j: u64 = 0;
    loop {
        let denom = BigRational::from_integer(BigInt::from(2 * j + 1));
        let term = &power / &denom;
        lo_sum += round_down(&Rational::from_big(term), guard).into_big();
        terms += 1;
        power = &power * &y2;
        j += 1;
        // remainder after j terms: sum_{k>=j} y^(2k+1)/(2k+1) <= y^(2j+1)/((2j+1)(1-y^2))
        let tail = &power / BigRational::from_integer(BigInt::from(2 * j + 1)) * &tail_factor;
        if tail < target {
            let rounding = BigRational::new(BigInt::from(terms), grid(guard));
            let hi = &lo_sum + &tail + rounding;
            return Interval::new(Rational::from_big(lo_sum), Rational::from_big(hi));
        }
    }
}

fn ln2_uncached(bits: u32) -> Interval {
    // ln 2 = 2 atanh(1/3)
    let y = BigRational::new(BigInt::one(), BigInt::from(3));
    atanh_small(&y, bits + 1).scale(&Rational::int(2))
}

type Cache = Mutex<HashMap<(BigInt, u32), Interval>>;

fn cache() -> &'static Cache {
    static CACHE: OnceLock<Cache> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

/// Encloses `ln(m)` for an integer `m >= 1` with width at most `2^-bits`.
pub fn ln_integer(m: &BigInt, bits: u32) -> Interval {
    assert!(m.is_positive(), "logarithm of a non-positive integer");
    let key = (m.clone(), bits);
    if let Some(hit) = cache().lock().expect("ln cache poisoned").get(&key) {
        return hit.clone();
    }
    let result = if m.is_one() {
        Interval::point(Rational::zero())
    } else {
        let k = m.bits() - 1;
        let two_k = BigInt::one() << k as usize;
        // m = 2^k * r with r in [1, 2); y = (r-1)/(r+1) <= 1/3
        let y = BigRational::new(m - &two_k, m + &two_k);
        let k_bits = 64 - k.leading_zeros();
        let ln2 = if k > 0 {
            ln2_uncached(bits + k_bits + 2).scale(&Rational::from(k as usize))
        } else {
            Interval::point(Rational::zero())
        };
        let rest = atanh_small(&y, bits + 2).scale(&Rational::int(2));
        ln2.add(&rest).round_outward(bits + 3)
    };
    cache()
        .lock()
        .expect("ln cache poisoned")
        .insert(key, result.clone());
    result
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ln2_encloses_reference() {
        for bits in [16, 53, 128] {
            let iv = ln_integer(&BigInt::from(2), bits);
            assert!(iv.width() <= Rational::from_big(BigRational::new(BigInt::one(), grid(bits))));
            let reference = std::f64::consts::LN_2;
            assert!(iv.lo.to_f64() <= reference + 1e-15 && iv.hi.to_f64() >= reference - 1e-15);
        }
    }

    #[test]
    fn ln_of_composites_matches_f64() {
        for m in [3u64, 5, 7, 10, 97, 1000, 65537, 1 << 20] {
            let iv = ln_integer(&BigInt::from(m), 60);
            let f = (m as f64).ln();
            assert!((iv.midpoint().to_f64() - f).abs() < 1e-12, "m={m}");
            assert!(iv.width() <= Rational::from_big(BigRational::new(BigInt::one(), grid(60))));
        }
    }

    #[test]
    fn ln_one_is_exact_zero() {
        let iv = ln_integer(&BigInt::one(), 32);
        assert!(iv.lo.is_zero() && iv.hi.is_zero());
    }

    #[test]
    fn rounding_is_outward() {
        let x = Rational::frac(1, 3);
        assert!(round_down(&x, 10) <= x);
        assert!(round_up(&x, 10) >= x);
        assert!(round_up(&x, 10) - round_down(&x, 10) <= Rational::frac(1, 1024));
    }
}
