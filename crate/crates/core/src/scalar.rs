//! Scalar abstraction shared by every solver in the crate.
//!
//! The solvers are written once against [`Scalar`] and instantiated with an
//! exact rational type for certificates and small instances, or with `f64`
//! for large simulation runs. Exact types compare with zero tolerance.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{FromPrimitive, Num, One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

pub trait Scalar:
    Clone + Debug + Display + PartialOrd + Num + Signed + FromPrimitive + ToPrimitive + Sum + Send + Sync + 'static
{
    /// True when arithmetic is exact and comparisons need no tolerance.
    const EXACT: bool;

    /// Absolute slack used by sign tests. Zero for exact types.
    fn tolerance() -> Self;

    fn from_rational(q: &BigRational) -> Self;

    fn to_rational(&self) -> BigRational;

    fn ratio(numer: i64, denom: i64) -> Self {
        Self::from_rational(&BigRational::new(BigInt::from(numer), BigInt::from(denom)))
    }

    fn to_f64_lossy(&self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    fn is_pos(&self) -> bool {
        *self > Self::tolerance()
    }

    fn is_neg(&self) -> bool {
        *self < -Self::tolerance()
    }

    /// Zero up to tolerance.
    fn is_nil(&self) -> bool {
        !self.is_pos() && !self.is_neg()
    }

    fn approx_eq(&self, other: &Self) -> bool {
        (self.clone() - other.clone()).is_nil()
    }

    /// `self <= other` up to tolerance.
    fn le_tol(&self, other: &Self) -> bool {
        !(self.clone() - other.clone()).is_pos()
    }
}

impl Scalar for f64 {
    const EXACT: bool = false;

    fn tolerance() -> Self {
        1e-9
    }

    fn from_rational(q: &BigRational) -> Self {
        q.to_f64().unwrap_or(f64::NAN)
    }

    fn to_rational(&self) -> BigRational {
        BigRational::from_float(*self).unwrap_or_else(BigRational::zero)
    }
}

impl Scalar for BigRational {
    const EXACT: bool = true;

    fn tolerance() -> Self {
        BigRational::zero()
    }

    fn from_rational(q: &BigRational) -> Self {
        q.clone()
    }

    fn to_rational(&self) -> BigRational {
        self.clone()
    }
}

pub fn min<S: Scalar>(a: &S, b: &S) -> S {
    if b < a {
        b.clone()
    } else {
        a.clone()
    }
}

pub fn max<S: Scalar>(a: &S, b: &S) -> S {
    if b > a {
        b.clone()
    } else {
        a.clone()
    }
}

/// `max(0, x)`.
pub fn pos_part<S: Scalar>(x: S) -> S {
    if x.is_pos() {
        x
    } else {
        S::zero()
    }
}

/// Parses `"p/q"`, `"p"`, or a plain decimal such as `"0.125"` into an exact
/// rational. Decimals are converted digit by digit, never through `f64`.
pub fn parse_rational(text: &str) -> Result<BigRational> {
    let t = text.trim();
    if t.is_empty() {
        return Err(Error::Parse("empty rational literal".into()));
    }
    if let Some((n, d)) = t.split_once('/') {
        let n: BigInt = n.trim().parse().map_err(|_| Error::Parse(format!("bad numerator in `{t}`")))?;
        let d: BigInt = d.trim().parse().map_err(|_| Error::Parse(format!("bad denominator in `{t}`")))?;
        if d.is_zero() {
            return Err(Error::Parse(format!("zero denominator in `{t}`")));
        }
        return Ok(BigRational::new(n, d));
    }
    let (neg, body) = match t.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, t.strip_prefix('+').unwrap_or(t)),
    };
    let (int_part, frac_part) = body.split_once('.').unwrap_or((body, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(Error::Parse(format!("bad rational literal `{t}`")));
    }
    let digits = format!("{int_part}{frac_part}");
    if !digits.chars().all(|c| c.is_ascii_digit()) {
        return Err(Error::Parse(format!("bad rational literal `{t}`")));
    }
    let numer = BigInt::from_str_radix(&digits, 10).map_err(|_| Error::Parse(format!("bad rational literal `{t}`")))?;
    let denom = num_traits::pow(BigInt::from(10u8), frac_part.len());
    let q = BigRational::new(numer, denom);
    Ok(if neg { -q } else { q })
}

/// Canonical `"p/q"` (or `"p"` for integers) rendering of an exact rational.
pub fn format_rational(q: &BigRational) -> String {
    if q.denom().is_one() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::ratio(n, d)
    }

    #[test]
    fn parses_fractions_and_decimals() {
        assert_eq!(parse_rational("1/3").unwrap(), q(1, 3));
        assert_eq!(parse_rational(" 6/8 ").unwrap(), q(3, 4));
        assert_eq!(parse_rational("0.125").unwrap(), q(1, 8));
        assert_eq!(parse_rational("-2").unwrap(), q(-2, 1));
        assert_eq!(parse_rational(".5").unwrap(), q(1, 2));
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("abc").is_err());
        assert!(parse_rational("").is_err());
        assert!(parse_rational(".").is_err());
    }

    #[test]
    fn formats_round_trip() {
        for text in ["0", "7", "-3/4", "22/7"] {
            assert_eq!(format_rational(&parse_rational(text).unwrap()), text);
        }
    }

    #[test]
    fn float_tolerance() {
        assert!(1e-12f64.is_nil());
        assert!((0.1f64 + 0.2).approx_eq(&0.3));
        assert!(!q(1, 1_000_000_000_000).is_nil());
    }
}
