//! Exact rational helpers shared by every module.
//!
//! All deterministic weights are [`Rational`]s. They serialise as `"p/q"`
//! strings and never pass through floating point.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use crate::error::{Error, Result};

pub type Rational = BigRational;

pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

pub fn ratio(p: i64, q: i64) -> Rational {
    Rational::new(BigInt::from(p), BigInt::from(q))
}

pub fn from_usize(n: usize) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// Binomial coefficient `C(n, k)`, zero when `k > n`.
pub fn binom(n: usize, k: usize) -> BigInt {
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

pub fn binom_q(n: usize, k: usize) -> Rational {
    Rational::from_integer(binom(n, k))
}

/// `C(n, k)` as a `u128`, saturating on overflow.
pub fn binom_u128(n: usize, k: usize) -> u128 {
    binom(n, k).to_u128().unwrap_or(u128::MAX)
}

pub fn pow2(e: usize) -> BigInt {
    BigInt::one() << e
}

/// Formats as `"p/q"`, always with an explicit denominator.
pub fn to_fraction_string(q: &Rational) -> String {
    format!("{}/{}", q.numer(), q.denom())
}

/// Parses `"p/q"` or a bare integer `"p"`. Decimal points are rejected.
pub fn parse_fraction(s: &str) -> Result<Rational> {
    let s = s.trim();
    let bad = || Error::Format(format!("not an exact fraction: {s:?}"));
    let (p, q) = match s.split_once('/') {
        Some((p, q)) => (p.trim(), q.trim()),
        None => (s, "1"),
    };
    let p: BigInt = p.parse().map_err(|_| bad())?;
    let q: BigInt = q.parse().map_err(|_| bad())?;
    if q.is_zero() {
        return Err(bad());
    }
    Ok(Rational::new(p, q))
}

pub fn to_f64(q: &Rational) -> f64 {
    q.to_f64().unwrap_or(f64::NAN)
}

/// Smallest integer `>= q`.
pub fn ceil_to_usize(q: &Rational) -> usize {
    q.ceil().to_integer().to_usize().expect("non-negative bounded value")
}
