//! Exact values of the form `r + Σ cₖ·ln(aₖ)`.
//!
//! Payments of the optimal mechanism integrate pieces `a + b/z`, so they carry
//! logarithms of rational breakpoints. Every expression is kept in a canonical
//! form where each logarithm argument is split into its prime factors and terms
//! over the same prime are merged. Because `1, ln 2, ln 3, ln 5, …` are linearly
//! independent over the rationals, an expression is zero exactly when its
//! rational part and all of its coefficients vanish; any other expression has a
//! definite sign that interval refinement will eventually expose.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::sync::OnceLock;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::interval::{self, Interval};
use crate::rational::Rational;

/// Default cap, in bits, on refinement when deciding signs.
pub const DEFAULT_PRECISION_CAP: u32 = 256;

/// Environment variable overriding [`DEFAULT_PRECISION_CAP`].
pub const PRECISION_ENV: &str = "KNIGHTIAN_PRECISION_BITS";

const TRIAL_DIVISION_LIMIT: u64 = 1 << 20;

/// Precision cap in effect for this process.
pub fn precision_cap() -> u32 {
    static CAP: OnceLock<u32> = OnceLock::new();
    *CAP.get_or_init(|| {
        std::env::var(PRECISION_ENV)
            .ok()
            .and_then(|v| v.trim().parse::<u32>().ok())
            .filter(|&b| b >= 16)
            .unwrap_or(DEFAULT_PRECISION_CAP)
    })
}

#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct PriceExpression {
    rational: Rational,
    /// coefficient per logarithm atom; atoms are primes (or unfactored cofactors
    /// above the trial-division limit), coefficients are never zero
    logs: BTreeMap<BigInt, Rational>,
}

impl PriceExpression {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn rational(value: Rational) -> Self {
        PriceExpression {
            rational: value,
            logs: BTreeMap::new(),
        }
    }

    /// `coefficient · ln(argument)` for a positive rational argument.
    pub fn ln_term(coefficient: Rational, argument: &Rational) -> Result<Self> {
        if !argument.is_positive() {
            return Err(Error::Domain(format!(
                "logarithm argument must be positive, got {argument}"
            )));
        }
        let mut out = PriceExpression::zero();
        if coefficient.is_zero() {
            return Ok(out);
        }
        for (p, e) in factor(argument.numer()) {
            out.add_log(p, &coefficient * &Rational::from(e));
        }
        for (p, e) in factor(argument.denom()) {
            out.add_log(p, -(&coefficient * &Rational::from(e)));
        }
        Ok(out)
    }

    /// Builds an expression from a rational part and `(coefficient, argument)` pairs.
    pub fn from_parts(rational: Rational, terms: &[(Rational, Rational)]) -> Result<Self> {
        let mut out = PriceExpression::rational(rational);
        for (c, a) in terms {
            out = out + PriceExpression::ln_term(c.clone(), a)?;
        }
        Ok(out)
    }

    fn add_log(&mut self, atom: BigInt, coefficient: Rational) {
        if coefficient.is_zero() || atom.is_one() {
            return;
        }
        use std::collections::btree_map::Entry;
        match self.logs.entry(atom) {
            Entry::Vacant(slot) => {
                slot.insert(coefficient);
            }
            Entry::Occupied(mut slot) => {
                *slot.get_mut() += &coefficient;
                if slot.get().is_zero() {
                    slot.remove();
                }
            }
        }
    }

    pub fn rational_part(&self) -> &Rational {
        &self.rational
    }

    /// Canonical logarithm terms as `(coefficient, atom)` pairs.
    pub fn log_terms(&self) -> impl Iterator<Item = (&Rational, &BigInt)> {
        self.logs.iter().map(|(a, c)| (c, a))
    }

    pub fn is_rational(&self) -> bool {
        self.logs.is_empty()
    }

    pub fn as_rational(&self) -> Option<&Rational> {
        if self.logs.is_empty() {
            Some(&self.rational)
        } else {
            None
        }
    }

    /// True when the expression is exactly zero.
    pub fn is_zero(&self) -> bool {
        self.logs.is_empty() && self.rational.is_zero()
    }

    pub fn scale(&self, by: &Rational) -> Self {
        if by.is_zero() {
            return PriceExpression::zero();
        }
        PriceExpression {
            rational: &self.rational * by,
            logs: self.logs.iter().map(|(a, c)| (a.clone(), c * by)).collect(),
        }
    }

    /// Encloses the value in an interval of width at most `2^-bits`.
    pub fn enclose(&self, bits: u32) -> Interval {
        let mut acc = Interval::point(self.rational.clone());
        if self.logs.is_empty() {
            return acc;
        }
        let weight: Rational = self.logs.values().map(|c| c.abs()).sum();
        let extra = interval::magnitude_bits(&weight) + 2;
        for (atom, c) in &self.logs {
            let ln = interval::ln_integer(atom, bits + extra);
            acc = acc.add(&ln.scale(c));
        }
        acc.round_outward(bits + 1)
    }

    pub fn to_f64(&self) -> f64 {
        self.enclose(60).midpoint().to_f64()
    }

    /// Sign of the expression, refining precision up to `cap` bits.
    pub fn sign_with_cap(&self, cap: u32) -> Result<Ordering> {
        self.sign_detail(cap).map(|(s, _)| s)
    }

    /// Sign together with the precision in bits that decided it (0 when exact).
    pub fn sign_detail(&self, cap: u32) -> Result<(Ordering, u32)> {
        if self.logs.is_empty() {
            return Ok((self.rational.signum(), 0));
        }
        let mut bits = 48u32.min(cap);
        loop {
            let iv = self.enclose(bits);
            if iv.lo.is_positive() {
                return Ok((Ordering::Greater, bits));
            }
            if iv.hi.is_negative() {
                return Ok((Ordering::Less, bits));
            }
            if bits >= cap {
                return Err(Error::UndecidableAtPrecision { bits: cap });
            }
            bits = (bits * 2).min(cap);
        }
    }

    pub fn sign(&self) -> Result<Ordering> {
        self.sign_with_cap(precision_cap())
    }

    /// Compares two expressions exactly (subject to the precision cap).
    pub fn compare(&self, other: &PriceExpression) -> Result<Ordering> {
        (self - other).sign()
    }

    /// A rational lower bound that is exact for rational values, strictly positive
    /// for positive values and zero for exact zeros.
    pub fn certified_lower_bound(&self, bits: u32, cap: u32) -> Result<Rational> {
        if let Some(r) = self.as_rational() {
            return Ok(r.clone());
        }
        let sign = self.sign_with_cap(cap)?;
        let mut b = bits;
        loop {
            let iv = self.enclose(b);
            match sign {
                Ordering::Greater if !iv.lo.is_positive() && b < cap => b = (b * 2).min(cap),
                _ => return Ok(iv.lo),
            }
        }
    }
}

/// Prime factorization by trial division. A cofactor left over above the limit
/// is returned as a single atom; it is prime whenever it is below the square of
/// the limit, otherwise sums involving it may be reported undecidable.
fn factor(n: &BigInt) -> Vec<(BigInt, u32)> {
    let mut out = Vec::new();
    let mut n = n.abs();
    if n.is_zero() || n.is_one() {
        return out;
    }
    if let Some(mut small) = n.to_u64() {
        let mut p = 2u64;
        while p <= TRIAL_DIVISION_LIMIT && p * p <= small {
            if small % p == 0 {
                let mut e = 0;
                while small % p == 0 {
                    small /= p;
                    e += 1;
                }
                out.push((BigInt::from(p), e));
            }
            p += if p == 2 { 1 } else { 2 };
        }
        if small > 1 {
            out.push((BigInt::from(small), 1));
        }
        return out;
    }
    let mut p = 2u64;
    while p <= TRIAL_DIVISION_LIMIT {
        let bp = BigInt::from(p);
        if &bp * &bp > n {
            break;
        }
        let mut e = 0;
        loop {
            let (q, r) = n.div_rem(&bp);
            if !r.is_zero() {
                break;
            }
            n = q;
            e += 1;
        }
        if e > 0 {
            out.push((bp, e));
        }
        p += if p == 2 { 1 } else { 2 };
    }
    if !n.is_one() {
        out.push((n, 1));
    }
    out
}

impl std::ops::Add for PriceExpression {
    type Output = PriceExpression;
    fn add(mut self, rhs: PriceExpression) -> PriceExpression {
        self.rational += rhs.rational;
        for (a, c) in rhs.logs {
            self.add_log(a, c);
        }
        self
    }
}

impl<'a> std::ops::Add<&'a PriceExpression> for &'a PriceExpression {
    type Output = PriceExpression;
    fn add(self, rhs: &PriceExpression) -> PriceExpression {
        self.clone() + rhs.clone()
    }
}

impl std::ops::Sub for PriceExpression {
    type Output = PriceExpression;
    fn sub(self, rhs: PriceExpression) -> PriceExpression {
        self + (-rhs)
    }
}

impl<'a> std::ops::Sub<&'a PriceExpression> for &'a PriceExpression {
    type Output = PriceExpression;
    fn sub(self, rhs: &PriceExpression) -> PriceExpression {
        self.clone() + (-rhs.clone())
    }
}

impl std::ops::Neg for PriceExpression {
    type Output = PriceExpression;
    fn neg(self) -> PriceExpression {
        PriceExpression {
            rational: -self.rational,
            logs: self.logs.into_iter().map(|(a, c)| (a, -c)).collect(),
        }
    }
}

impl std::ops::Add<Rational> for PriceExpression {
    type Output = PriceExpression;
    fn add(mut self, rhs: Rational) -> PriceExpression {
        self.rational += rhs;
        self
    }
}

impl From<Rational> for PriceExpression {
    fn from(r: Rational) -> Self {
        PriceExpression::rational(r)
    }
}

impl fmt::Display for PriceExpression {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        if !self.rational.is_zero() || self.logs.is_empty() {
            write!(f, "{}", self.rational)?;
            first = false;
        }
        for (a, c) in &self.logs {
            let coef = if c.abs() == Rational::one() { String::new() } else { format!("{}*", c.abs()) };
            match (first, c.is_negative()) {
                (true, true) => write!(f, "-{coef}ln({a})")?,
                (true, false) => write!(f, "{coef}ln({a})")?,
                (false, true) => write!(f, " - {coef}ln({a})")?,
                (false, false) => write!(f, " + {coef}ln({a})")?,
            }
            first = false;
        }
        Ok(())
    }
}

impl fmt::Debug for PriceExpression {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

#[derive(Serialize, Deserialize)]
struct Wire {
    rat: Rational,
    logs: Vec<(Rational, Rational)>,
}

impl Serialize for PriceExpression {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        Wire {
            rat: self.rational.clone(),
            logs: self
                .logs
                .iter()
                .map(|(a, c)| (c.clone(), Rational::from(a.clone())))
                .collect(),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for PriceExpression {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let w = Wire::deserialize(deserializer)?;
        PriceExpression::from_parts(w.rat, &w.logs).map_err(D::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(p: i64, q: i64) -> Rational {
        Rational::frac(p, q)
    }

    #[test]
    fn logs_of_equal_values_cancel() {
        // ln(6) - ln(2) - ln(3) == 0
        let e = PriceExpression::ln_term(r(1, 1), &r(6, 1)).unwrap()
            - PriceExpression::ln_term(r(1, 1), &r(2, 1)).unwrap()
            - PriceExpression::ln_term(r(1, 1), &r(3, 1)).unwrap();
        assert!(e.is_zero());
        assert_eq!(e.sign().unwrap(), Ordering::Equal);
    }

    #[test]
    fn ln16_is_four_ln2() {
        let a = PriceExpression::ln_term(r(1, 3), &r(16, 1)).unwrap();
        let b = PriceExpression::ln_term(r(4, 3), &r(2, 1)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn sign_of_close_values() {
        // ln 2 - 0.6931471805599453 > 0 (the f64 value is below ln 2)
        let approx: Rational = "0.6931471805599453".parse().unwrap();
        let e = PriceExpression::ln_term(r(1, 1), &r(2, 1)).unwrap() + (-approx);
        assert_eq!(e.sign().unwrap(), Ordering::Greater);
        // 3 ln 2 vs ln 8 + 1/10^40
        let tiny = Rational::from_bigints(BigInt::one(), num_traits::pow(BigInt::from(10), 40)).unwrap();
        let e = PriceExpression::ln_term(r(3, 1), &r(2, 1)).unwrap()
            - (PriceExpression::ln_term(r(1, 1), &r(8, 1)).unwrap() + tiny);
        assert_eq!(e.sign().unwrap(), Ordering::Less);
    }

    #[test]
    fn undecidable_below_cap() {
        let tiny = Rational::from_bigints(BigInt::one(), BigInt::one() << 300usize).unwrap();
        let e = PriceExpression::ln_term(r(1, 1), &r(2, 1)).unwrap()
            - PriceExpression::ln_term(r(1, 1), &r(2, 1)).unwrap()
            + tiny
            + PriceExpression::ln_term(r(1, 1), &r(3, 1)).unwrap()
            - PriceExpression::ln_term(r(1, 1), &r(3, 1)).unwrap();
        // still rational after cancellation, so exactly decidable
        assert_eq!(e.sign_with_cap(64).unwrap(), Ordering::Greater);
        let close = PriceExpression::ln_term(r(1, 1), &r(2, 1)).unwrap()
            + (-(PriceExpression::ln_term(r(1, 1), &r(2, 1)).unwrap().enclose(200).lo));
        assert!(matches!(
            close.sign_with_cap(64),
            Err(Error::UndecidableAtPrecision { bits: 64 })
        ));
    }

    #[test]
    fn enclosure_width_bound() {
        let e = PriceExpression::from_parts(r(1, 3), &[(r(32, 15), r(2, 1)), (r(-7, 2), r(15, 4))]).unwrap();
        for bits in [20, 60, 120] {
            let iv = e.enclose(bits);
            let bound = Rational::from_bigints(BigInt::one(), BigInt::one() << bits as usize).unwrap();
            assert!(iv.width() <= bound);
        }
        let f = 1.0 / 3.0 + 32.0 / 15.0 * 2f64.ln() - 3.5 * (15.0f64 / 4.0).ln();
        assert!((e.to_f64() - f).abs() < 1e-12);
    }

    #[test]
    fn json_wire_format() {
        let e = PriceExpression::from_parts(r(1, 2), &[(r(32, 15), r(2, 1))]).unwrap();
        let s = serde_json::to_string(&e).unwrap();
        assert_eq!(s, r#"{"rat":"1/2","logs":[["32/15","2"]]}"#);
        let back: PriceExpression = serde_json::from_str(&s).unwrap();
        assert_eq!(back, e);
        // composite arguments are canonicalized on input
        let e2: PriceExpression = serde_json::from_str(r#"{"rat":"0","logs":[["1","6/5"]]}"#).unwrap();
        assert_eq!(e2.log_terms().count(), 3);
    }

    #[test]
    fn factorization() {
        assert_eq!(
            factor(&BigInt::from(360)),
            vec![(BigInt::from(2), 3), (BigInt::from(3), 2), (BigInt::from(5), 1)]
        );
        assert_eq!(factor(&BigInt::from(97)), vec![(BigInt::from(97), 1)]);
    }
}
