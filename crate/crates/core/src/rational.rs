//! Exact rationals backed by `num_rational::BigRational`, plus the few helpers
//! the engine needs on top of it: text I/O and exact square roots.

use num_bigint::{BigInt, Sign};
use num_traits::{One, Signed, Zero};
use thiserror::Error;

pub type Rational = num_rational::BigRational;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RationalParseError {
    #[error("invalid rational literal {0:?}")]
    Syntax(String),
    #[error("zero denominator in {0:?}")]
    ZeroDenominator(String),
}

pub fn int(v: i64) -> Rational {
    Rational::from_integer(BigInt::from(v))
}

pub fn ratio(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

/// Parses `"p/q"` or `"p"`; the result is reduced with a positive denominator.
pub fn parse_rational(s: &str) -> Result<Rational, RationalParseError> {
    let t = s.trim();
    let syntax = || RationalParseError::Syntax(s.to_string());
    let (num, den) = match t.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (t, "1"),
    };
    let num: BigInt = num.parse().map_err(|_| syntax())?;
    let den: BigInt = den.parse().map_err(|_| syntax())?;
    if den.is_zero() {
        return Err(RationalParseError::ZeroDenominator(s.to_string()));
    }
    Ok(Rational::new(num, den))
}

/// `"p/q"`, or `"p"` when the denominator is one.
pub fn format_rational(r: &Rational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Square root of a non-negative integer if it is a perfect square.
pub fn exact_isqrt(n: &BigInt) -> Option<BigInt> {
    if n.sign() == Sign::Minus {
        return None;
    }
    let r = n.sqrt();
    if &(&r * &r) == n {
        Some(r)
    } else {
        None
    }
}

/// Outcome of taking an exact square root of a rational.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SquareRoot {
    /// Non-negative root.
    Exact(Rational),
    Negative,
    NotASquare,
}

/// Non-negative square root of `q` over the rationals. `q` is reduced, so it is
/// a square iff numerator and denominator both are.
pub fn exact_sqrt(q: &Rational) -> SquareRoot {
    if q.is_negative() {
        return SquareRoot::Negative;
    }
    match (exact_isqrt(q.numer()), exact_isqrt(q.denom())) {
        (Some(n), Some(d)) => SquareRoot::Exact(Rational::new(n, d)),
        _ => SquareRoot::NotASquare,
    }
}

/// `base^exp` for a small non-negative exponent.
pub fn pow(base: &Rational, exp: u32) -> Rational {
    num_traits::pow(base.clone(), exp as usize)
}

/// Binomial coefficient as a `BigInt` (exact for any size).
pub fn binomial(n: u64, k: u64) -> BigInt {
    if k > n {
        return BigInt::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigInt::one();
    for i in 0..k {
        acc *= n - i;
        acc /= i + 1;
    }
    acc
}

pub fn factorial(n: u64) -> BigInt {
    (1..=n).fold(BigInt::one(), |acc, i| acc * i)
}
