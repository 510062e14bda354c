//! Exact rational scalars.
//!
//! Every bid, valuation, inaccuracy and allocation probability in the crate is a
//! [`Rational`]. Values render as `"p/q"` (or `"p"` when the denominator is one)
//! and parse from either that form or an exact decimal string such as `"0.05"`.

use std::cmp::Ordering;
use std::fmt;
use std::iter::{Product, Sum};
use std::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub, SubAssign};
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::Error;

/// An exact, always-normalized rational number.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Rational(BigRational);

impl Rational {
    pub fn new(numer: i64, denom: i64) -> Result<Self, Error> {
        if denom == 0 {
            return Err(Error::DivisionByZero);
        }
        Ok(Rational(BigRational::new(numer.into(), denom.into())))
    }

    /// Panicking constructor for literals known to be valid.
    pub fn frac(numer: i64, denom: i64) -> Self {
        Self::new(numer, denom).expect("zero denominator")
    }

    pub fn int(value: i64) -> Self {
        Rational(BigRational::from_integer(value.into()))
    }

    pub fn from_big(value: BigRational) -> Self {
        Rational(value)
    }

    pub fn from_bigints(numer: BigInt, denom: BigInt) -> Result<Self, Error> {
        if denom.is_zero() {
            return Err(Error::DivisionByZero);
        }
        Ok(Rational(BigRational::new(numer, denom)))
    }

    pub fn zero() -> Self {
        Rational(BigRational::zero())
    }

    pub fn one() -> Self {
        Rational(BigRational::one())
    }

    pub fn as_big(&self) -> &BigRational {
        &self.0
    }

    pub fn into_big(self) -> BigRational {
        self.0
    }

    pub fn numer(&self) -> &BigInt {
        self.0.numer()
    }

    pub fn denom(&self) -> &BigInt {
        self.0.denom()
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn is_positive(&self) -> bool {
        self.0.is_positive()
    }

    pub fn is_negative(&self) -> bool {
        self.0.is_negative()
    }

    pub fn is_integer(&self) -> bool {
        self.0.is_integer()
    }

    pub fn abs(&self) -> Self {
        Rational(self.0.abs())
    }

    pub fn signum(&self) -> Ordering {
        self.0.cmp(&BigRational::zero())
    }

    pub fn checked_div(&self, rhs: &Rational) -> Result<Rational, Error> {
        if rhs.is_zero() {
            return Err(Error::DivisionByZero);
        }
        Ok(Rational(&self.0 / &rhs.0))
    }

    pub fn recip(&self) -> Result<Rational, Error> {
        Rational::one().checked_div(self)
    }

    pub fn floor(&self) -> BigInt {
        self.0.floor().to_integer()
    }

    pub fn ceil(&self) -> BigInt {
        self.0.ceil().to_integer()
    }

    /// Floor as a machine integer; panics if it does not fit.
    pub fn floor_i64(&self) -> i64 {
        self.floor().to_i64().expect("floor out of i64 range")
    }

    pub fn ceil_i64(&self) -> i64 {
        self.ceil().to_i64().expect("ceil out of i64 range")
    }

    pub fn to_i64(&self) -> Option<i64> {
        if self.is_integer() {
            self.0.numer().to_i64()
        } else {
            None
        }
    }

    pub fn pow(&self, exp: u32) -> Rational {
        Rational(num_traits::Pow::pow(&self.0, exp))
    }

    pub fn min(self, other: Rational) -> Rational {
        if other < self {
            other
        } else {
            self
        }
    }

    pub fn max(self, other: Rational) -> Rational {
        if other > self {
            other
        } else {
            self
        }
    }

    pub fn to_f64(&self) -> f64 {
        // BigRational::to_f64 handles large operands without overflowing to NaN.
        self.0.to_f64().unwrap_or(f64::NAN)
    }

    /// Decimal rendering with `digits` significant digits, rounded half away from zero.
    pub fn to_sig_digits(&self, digits: usize) -> String {
        if self.is_zero() {
            return "0".to_string();
        }
        let digits = digits.max(1);
        let negative = self.is_negative();
        let a = self.abs();
        // exponent e with 10^e <= a < 10^(e+1)
        let mut e: i64 = {
            let f = a.to_f64();
            if f.is_finite() && f > 0.0 {
                f.log10().floor() as i64
            } else {
                0
            }
        };
        let ten = Rational::int(10);
        let pow10 = |k: i64| -> Rational {
            if k >= 0 {
                ten.pow(k as u32)
            } else {
                ten.pow((-k) as u32).recip().expect("nonzero")
            }
        };
        // correct any floating-point misjudgement of the exponent
        while pow10(e) > a {
            e -= 1;
        }
        while pow10(e + 1) <= a {
            e += 1;
        }
        let scale = digits as i64 - 1 - e;
        let scaled = &a * &pow10(scale);
        let mut m = (scaled + Rational::frac(1, 2)).floor();
        let mut scale = scale;
        if m.to_string().len() > digits {
            m /= 10;
            scale -= 1;
        }
        let mut s = m.to_string();
        let body = if scale <= 0 {
            s.push_str(&"0".repeat((-scale) as usize));
            s
        } else {
            let scale = scale as usize;
            if s.len() <= scale {
                s = format!("{}{}", "0".repeat(scale - s.len() + 1), s);
            }
            let (ip, fp) = s.split_at(s.len() - scale);
            let fp = fp.trim_end_matches('0');
            if fp.is_empty() {
                ip.to_string()
            } else {
                format!("{ip}.{fp}")
            }
        };
        if negative {
            format!("-{body}")
        } else {
            body
        }
    }
}

impl fmt::Display for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_integer() {
            write!(f, "{}", self.0.numer())
        } else {
            write!(f, "{}/{}", self.0.numer(), self.0.denom())
        }
    }
}

impl fmt::Debug for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl FromStr for Rational {
    type Err = Error;

    /// Accepts `p`, `p/q`, and exact decimals `[-]d*.d*`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = |col: usize, msg: &str| Error::Parse {
            input: s.to_string(),
            position: col,
            message: msg.to_string(),
        };
        let t = s.trim();
        let offset = s.find(t).unwrap_or(0);
        if t.is_empty() {
            return Err(bad(0, "empty rational"));
        }
        if let Some(slash) = t.find('/') {
            let (p, q) = (&t[..slash], &t[slash + 1..]);
            let numer = parse_int(p).map_err(|c| bad(offset + c, "invalid numerator"))?;
            let denom =
                parse_int(q).map_err(|c| bad(offset + slash + 1 + c, "invalid denominator"))?;
            if denom.is_zero() {
                return Err(bad(offset + slash + 1, "zero denominator"));
            }
            return Ok(Rational(BigRational::new(numer, denom)));
        }
        if let Some(dot) = t.find('.') {
            let (ip, fp) = (&t[..dot], &t[dot + 1..]);
            if let Some(c) = fp.find(|ch: char| !ch.is_ascii_digit()) {
                return Err(bad(offset + dot + 1 + c, "invalid decimal digit"));
            }
            let negative = ip.starts_with('-');
            let ip_digits = ip.trim_start_matches(['-', '+']);
            if ip_digits.is_empty() && fp.is_empty() {
                return Err(bad(offset, "no digits"));
            }
            let whole = if ip_digits.is_empty() {
                BigInt::zero()
            } else {
                parse_int(ip_digits).map_err(|c| bad(offset + (ip.len() - ip_digits.len()) + c, "invalid integer part"))?
            };
            let frac = if fp.is_empty() {
                BigInt::zero()
            } else {
                parse_int(fp).map_err(|c| bad(offset + dot + 1 + c, "invalid fraction"))?
            };
            let scale = num_traits::pow(BigInt::from(10), fp.len());
            let mut v = BigRational::new(whole * &scale + frac, scale);
            if negative {
                v = -v;
            }
            return Ok(Rational(v));
        }
        let numer = parse_int(t).map_err(|c| bad(offset + c, "invalid integer"))?;
        Ok(Rational(BigRational::from_integer(numer)))
    }
}

/// Parses a signed decimal integer; on failure returns the offending column.
fn parse_int(s: &str) -> Result<BigInt, usize> {
    let digits_start = usize::from(s.starts_with(['-', '+']));
    if s.len() == digits_start {
        return Err(digits_start);
    }
    if let Some(c) = s[digits_start..].find(|ch: char| !ch.is_ascii_digit()) {
        return Err(digits_start + c);
    }
    s.parse::<BigInt>().map_err(|_| 0)
}

impl Serialize for Rational {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Rational {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

impl From<i64> for Rational {
    fn from(v: i64) -> Self {
        Rational::int(v)
    }
}

impl From<u32> for Rational {
    fn from(v: u32) -> Self {
        Rational::int(v.into())
    }
}

impl From<usize> for Rational {
    fn from(v: usize) -> Self {
        Rational(BigRational::from_integer(v.into()))
    }
}

impl From<BigInt> for Rational {
    fn from(v: BigInt) -> Self {
        Rational(BigRational::from_integer(v))
    }
}

macro_rules! binop {
    ($trait:ident, $method:ident) => {
        impl $trait<Rational> for Rational {
            type Output = Rational;
            fn $method(self, rhs: Rational) -> Rational {
                Rational(self.0.$method(rhs.0))
            }
        }
        impl<'a> $trait<&'a Rational> for Rational {
            type Output = Rational;
            fn $method(self, rhs: &'a Rational) -> Rational {
                Rational(self.0.$method(&rhs.0))
            }
        }
        impl<'a> $trait<Rational> for &'a Rational {
            type Output = Rational;
            fn $method(self, rhs: Rational) -> Rational {
                Rational((&self.0).$method(rhs.0))
            }
        }
        impl<'a, 'b> $trait<&'b Rational> for &'a Rational {
            type Output = Rational;
            fn $method(self, rhs: &'b Rational) -> Rational {
                Rational((&self.0).$method(&rhs.0))
            }
        }
    };
}

binop!(Add, add);
binop!(Sub, sub);
binop!(Mul, mul);

// Division panics on a zero divisor like the integer types do; fallible callers
// use `checked_div`.
binop!(Div, div);

impl Neg for Rational {
    type Output = Rational;
    fn neg(self) -> Rational {
        Rational(-self.0)
    }
}

impl Neg for &Rational {
    type Output = Rational;
    fn neg(self) -> Rational {
        Rational(-&self.0)
    }
}

impl AddAssign<&Rational> for Rational {
    fn add_assign(&mut self, rhs: &Rational) {
        self.0 += &rhs.0;
    }
}

impl AddAssign<Rational> for Rational {
    fn add_assign(&mut self, rhs: Rational) {
        self.0 += rhs.0;
    }
}

impl SubAssign<&Rational> for Rational {
    fn sub_assign(&mut self, rhs: &Rational) {
        self.0 -= &rhs.0;
    }
}

impl SubAssign<Rational> for Rational {
    fn sub_assign(&mut self, rhs: Rational) {
        self.0 -= rhs.0;
    }
}

impl MulAssign<&Rational> for Rational {
    fn mul_assign(&mut self, rhs: &Rational) {
        self.0 *= &rhs.0;
    }
}

impl Sum for Rational {
    fn sum<I: Iterator<Item = Rational>>(iter: I) -> Self {
        iter.fold(Rational::zero(), |acc, x| acc + x)
    }
}

impl<'a> Sum<&'a Rational> for Rational {
    fn sum<I: Iterator<Item = &'a Rational>>(iter: I) -> Self {
        iter.fold(Rational::zero(), |acc, x| acc + x)
    }
}

impl Product for Rational {
    fn product<I: Iterator<Item = Rational>>(iter: I) -> Self {
        iter.fold(Rational::one(), |acc, x| acc * x)
    }
}

/// Greatest common divisor helper re-exported for callers that work on numerators.
pub fn gcd(a: &BigInt, b: &BigInt) -> BigInt {
    a.gcd(b)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn normalizes_on_construction() {
        let r = Rational::frac(6, -4);
        assert_eq!(r.numer(), &BigInt::from(-3));
        assert_eq!(r.denom(), &BigInt::from(2));
        assert_eq!(r.to_string(), "-3/2");
    }

    #[test]
    fn zero_denominator_rejected() {
        assert!(Rational::new(1, 0).is_err());
        assert!(Rational::one().checked_div(&Rational::zero()).is_err());
        assert!("3/0".parse::<Rational>().is_err());
    }

    #[test]
    fn parses_fraction_integer_and_decimal() {
        assert_eq!("5/8".parse::<Rational>().unwrap(), Rational::frac(5, 8));
        assert_eq!("-7".parse::<Rational>().unwrap(), Rational::int(-7));
        assert_eq!("0.05".parse::<Rational>().unwrap(), Rational::frac(1, 20));
        assert_eq!("1.5".parse::<Rational>().unwrap(), Rational::frac(3, 2));
        assert_eq!(".25".parse::<Rational>().unwrap(), Rational::frac(1, 4));
    }

    #[test]
    fn parse_errors_report_position() {
        match "1/x3".parse::<Rational>() {
            Err(Error::Parse { position, .. }) => assert_eq!(position, 2),
            other => panic!("unexpected {other:?}"),
        }
        match "0.0a".parse::<Rational>() {
            Err(Error::Parse { position, .. }) => assert_eq!(position, 3),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn significant_digits() {
        assert_eq!(Rational::frac(5, 9).to_sig_digits(6), "0.555556");
        assert_eq!(Rational::frac(1, 9).to_sig_digits(6), "0.111111");
        assert_eq!(Rational::frac(1, 2).to_sig_digits(6), "0.5");
        assert_eq!(Rational::int(12345678).to_sig_digits(6), "12345700");
        assert_eq!(Rational::frac(-1, 3).to_sig_digits(3), "-0.333");
        assert_eq!(Rational::frac(9999999, 10000000).to_sig_digits(6), "1");
    }

    #[test]
    fn floor_and_ceil() {
        assert_eq!(Rational::frac(32, 9).floor_i64(), 3);
        assert_eq!(Rational::frac(3, 2).ceil_i64(), 2);
        assert_eq!(Rational::frac(-3, 2).floor_i64(), -2);
    }
}
