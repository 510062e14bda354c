use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::price_expr::PriceExpression;
use crate::rational::Rational;

/// A function of one player's own bid on `[0, upper]`, made of pieces `a + b/z`.
///
/// Piece `k` covers `[breakpoints[k-1], breakpoints[k]]`, with `0` and `upper`
/// as the outer ends. Values at breakpoints and at `z = 0` are not represented;
/// callers that need the exact point value evaluate the allocation rule directly.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PiecewiseAllocation {
    pub breakpoints: Vec<Rational>,
    pub pieces: Vec<(Rational, Rational)>,
    pub upper: Rational,
}

impl PiecewiseAllocation {
    pub fn constant(value: Rational, upper: Rational) -> Self {
        PiecewiseAllocation {
            breakpoints: Vec::new(),
            pieces: vec![(value, Rational::zero())],
            upper,
        }
    }

    /// Builds a profile from pieces given as `(lo, hi, a, b)` covering `[0, upper]`
    /// in order. Adjacent pieces with equal coefficients are merged.
    pub(crate) fn from_spans(spans: Vec<(Rational, Rational, Rational, Rational)>, upper: Rational) -> Self {
        let mut breakpoints = Vec::new();
        let mut pieces: Vec<(Rational, Rational)> = Vec::new();
        for (idx, (lo, _hi, a, b)) in spans.into_iter().enumerate() {
            if let Some(last) = pieces.last() {
                if last.0 == a && last.1 == b {
                    continue;
                }
            }
            if idx > 0 {
                breakpoints.push(lo);
            }
            pieces.push((a, b));
        }
        PiecewiseAllocation {
            breakpoints,
            pieces,
            upper,
        }
    }

    /// Start and end of piece `k`.
    pub fn span(&self, k: usize) -> (Rational, Rational) {
        let lo = if k == 0 {
            Rational::zero()
        } else {
            self.breakpoints[k - 1].clone()
        };
        let hi = self
            .breakpoints
            .get(k)
            .cloned()
            .unwrap_or_else(|| self.upper.clone());
        (lo, hi)
    }

    fn piece_index(&self, z: &Rational) -> usize {
        self.breakpoints.partition_point(|bp| bp <= z)
    }

    /// Value of the piece whose half-open span `[lo, hi)` contains `z`.
    pub fn eval(&self, z: &Rational) -> Rational {
        let (a, b) = &self.pieces[self.piece_index(z).min(self.pieces.len() - 1)];
        if b.is_zero() {
            a.clone()
        } else {
            a + b / z
        }
    }

    /// Left limit at `z > 0`.
    pub fn eval_left(&self, z: &Rational) -> Rational {
        let k = self.breakpoints.partition_point(|bp| bp < z);
        let (a, b) = &self.pieces[k.min(self.pieces.len() - 1)];
        if b.is_zero() {
            a.clone()
        } else {
            a + b / z
        }
    }

    /// `∫_lo^hi f(z) dz` for `0 ≤ lo ≤ hi ≤ upper`, exactly.
    pub fn integral(&self, lo: &Rational, hi: &Rational) -> Result<PriceExpression> {
        let mut total = PriceExpression::zero();
        if lo >= hi {
            return Ok(total);
        }
        for (k, (a, b)) in self.pieces.iter().enumerate() {
            let (s, e) = self.span(k);
            let s = s.max(lo.clone());
            let e = e.min(hi.clone());
            if s >= e {
                continue;
            }
            total = total + (a * (&e - &s));
            if !b.is_zero() {
                let ratio = e.checked_div(&s)?;
                total = total + PriceExpression::ln_term(b.clone(), &ratio)?;
            }
        }
        Ok(total)
    }
}
