//! Exact rational numbers and their text forms.

use std::fmt::Write as _;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

/// Arbitrary-precision rational used for every weight and value in the crate.
pub type Rational = num_rational::BigRational;

/// Builds `num/den`. Panics on a zero denominator.
pub fn q(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

pub fn zero() -> Rational {
    Rational::zero()
}

pub fn one() -> Rational {
    Rational::one()
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("invalid rational literal `{0}`")]
pub struct RationalParseError(pub String);

/// Parses `p/q` or a bare integer `p`.
pub fn parse_rational(text: &str) -> Result<Rational, RationalParseError> {
    let t = text.trim();
    let err = || RationalParseError(text.to_string());
    let (num, den) = match t.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (t, "1"),
    };
    let num: BigInt = num.parse().map_err(|_| err())?;
    let den: BigInt = den.parse().map_err(|_| err())?;
    if den.is_zero() {
        return Err(err());
    }
    Ok(Rational::new(num, den))
}

/// Canonical `p/q` rendering; integers keep the `/1`.
pub fn fmt_rational(r: &Rational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

/// Renders `r` with exactly `digits` digits after the point, rounded half away from zero.
pub fn fmt_decimal(r: &Rational, digits: usize) -> String {
    let scale = num_traits::pow(BigInt::from(10), digits);
    let scaled = r * Rational::from_integer(scale.clone());
    let rounded = scaled.round().to_integer();
    let neg = rounded.is_negative();
    let abs = rounded.abs();
    let (whole, frac) = abs.div_rem(&scale);
    let mut out = String::new();
    if neg {
        out.push('-');
    }
    write!(out, "{whole}").unwrap();
    if digits > 0 {
        let frac = frac.to_string();
        out.push('.');
        for _ in frac.len()..digits {
            out.push('0');
        }
        out.push_str(&frac);
    }
    out
}

/// Least common multiple of the denominators.
pub fn common_denominator<'a>(values: impl IntoIterator<Item = &'a Rational>) -> BigInt {
    values
        .into_iter()
        .fold(BigInt::one(), |acc, v| acc.lcm(v.denom()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_print() {
        assert_eq!(parse_rational("3/6").unwrap(), q(1, 2));
        assert_eq!(parse_rational(" 7 ").unwrap(), int(7));
        assert_eq!(parse_rational("-2/4").unwrap(), q(-1, 2));
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("a/2").is_err());
        assert_eq!(fmt_rational(&int(1)), "1/1");
        assert_eq!(fmt_rational(&q(2, 4)), "1/2");
    }

    #[test]
    fn decimals() {
        assert_eq!(fmt_decimal(&q(1, 3), 4), "0.3333");
        assert_eq!(fmt_decimal(&q(2, 3), 2), "0.67");
        assert_eq!(fmt_decimal(&q(1, 16), 4), "0.0625");
        assert_eq!(fmt_decimal(&q(-1, 2), 1), "-0.5");
        assert_eq!(fmt_decimal(&int(1), 0), "1");
        assert_eq!(fmt_decimal(&q(1, 100), 3), "0.010");
    }

    #[test]
    fn lcm_of_denominators() {
        let v = [q(1, 4), q(1, 6), q(1, 3)];
        assert_eq!(common_denominator(&v), BigInt::from(12));
    }
}
