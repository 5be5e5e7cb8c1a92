//! Scalar abstraction for the measure engines.
//!
//! All one-dimensional geometry (arc unions, ball families, measures of
//! approximation sets, Chung–Erdős bounds) is written against [`Scalar`], so
//! the same code runs in exact arithmetic over [`BigRational`] or in `f64`/`f32`
//! when speed matters more than exactness.

use std::fmt::Debug;
use std::ops::Neg;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Num, One, Signed, ToPrimitive, Zero};
use serde_json::{json, Value as Json};

pub trait Scalar:
    Clone + Debug + PartialOrd + Num + Neg<Output = Self> + Send + Sync + 'static
{
    /// Whether arithmetic on this type is exact.
    const EXACT: bool;

    fn from_i64(v: i64) -> Self;

    fn from_ratio(num: i64, den: i64) -> Self {
        Self::from_i64(num) / Self::from_i64(den)
    }

    fn from_rational(r: &BigRational) -> Self;

    fn floor(&self) -> Self;

    fn to_f64(&self) -> f64;

    /// JSON rendering: exact types emit `{"num", "den"}` string pairs, floats
    /// emit `{"value", "abs_error"}`.
    fn to_json(&self) -> Json;

    fn powu(&self, exp: u32) -> Self {
        num_traits::pow(self.clone(), exp as usize)
    }

    fn min_of(a: Self, b: Self) -> Self {
        if b < a {
            b
        } else {
            a
        }
    }

    fn max_of(a: Self, b: Self) -> Self {
        if b > a {
            b
        } else {
            a
        }
    }

    /// Representative of `self` modulo 1 in `[0, 1)`.
    fn frac(&self) -> Self {
        self.clone() - self.floor()
    }

    fn half() -> Self {
        Self::from_ratio(1, 2)
    }
}

impl Scalar for BigRational {
    const EXACT: bool = true;

    fn from_i64(v: i64) -> Self {
        BigRational::from_integer(BigInt::from(v))
    }

    fn from_ratio(num: i64, den: i64) -> Self {
        BigRational::new(BigInt::from(num), BigInt::from(den))
    }

    fn from_rational(r: &BigRational) -> Self {
        r.clone()
    }

    fn floor(&self) -> Self {
        BigRational::floor(self)
    }

    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }

    fn to_json(&self) -> Json {
        rational_json(self)
    }
}

macro_rules! float_scalar {
    ($t:ty) => {
        impl Scalar for $t {
            const EXACT: bool = false;

            fn from_i64(v: i64) -> Self {
                v as $t
            }

            fn from_rational(r: &BigRational) -> Self {
                ToPrimitive::to_f64(r).unwrap_or(f64::NAN) as $t
            }

            fn floor(&self) -> Self {
                <$t>::floor(*self)
            }

            fn to_f64(&self) -> f64 {
                *self as f64
            }

            fn to_json(&self) -> Json {
                json!({ "value": *self as f64, "abs_error": (<$t>::EPSILON * self.abs()) as f64 })
            }
        }
    };
}

float_scalar!(f64);
float_scalar!(f32);

/// `{"num": "...", "den": "..."}` with the sign carried by the numerator.
pub fn rational_json(r: &BigRational) -> Json {
    json!({ "num": r.numer().to_string(), "den": r.denom().to_string() })
}

/// Parses `"a/b"`, `"a"` or a JSON-style integer into an exact rational.
pub fn parse_rational(s: &str) -> Option<BigRational> {
    let s = s.trim();
    match s.split_once('/') {
        Some((n, d)) => {
            let n: BigInt = n.trim().parse().ok()?;
            let d: BigInt = d.trim().parse().ok()?;
            if d.is_zero() {
                return None;
            }
            Some(BigRational::new(n, d))
        }
        None => Some(BigRational::from_integer(s.parse().ok()?)),
    }
}

#[cfg(test)]
pub(crate) fn rat(num: i64, den: i64) -> BigRational {
    BigRational::from_ratio(num, den)
}

/// Exact `b`-th root of a nonnegative rational when it exists.
pub fn exact_root(r: &BigRational, b: u32) -> Option<BigRational> {
    if b == 1 {
        return Some(r.clone());
    }
    if r.is_negative() {
        return None;
    }
    let n = r.numer().nth_root(b);
    let d = r.denom().nth_root(b);
    if num_traits::pow(n.clone(), b as usize) == *r.numer()
        && num_traits::pow(d.clone(), b as usize) == *r.denom()
    {
        Some(BigRational::new(n, d))
    } else {
        None
    }
}

/// `r^e` for a rational exponent when the result is rational.
pub fn exact_rational_pow(r: &BigRational, e: &BigRational) -> Option<BigRational> {
    if e.is_zero() {
        return Some(BigRational::one());
    }
    if r.is_zero() {
        return if e.is_positive() {
            Some(BigRational::zero())
        } else {
            None
        };
    }
    let den = e.denom().to_u32()?;
    let num = e.numer().abs().to_u32()?;
    let root = exact_root(r, den)?;
    let p = num_traits::pow(root, num as usize);
    Some(if e.is_negative() { p.recip() } else { p })
}
