//! Nonnegative quantities that are either exact rationals or rigorous float
//! enclosures `[lo, hi]` with outward rounding.
//!
//! Irrational power laws (`|q|^{-τ}` with non-integral `τ`) leave the exact
//! path here; everything downstream carries the enclosure through sums and
//! products without losing containment.

use std::cmp::Ordering;

use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use serde::ser::SerializeMap;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::scalar::exact_rational_pow;

/// Relative slack granted to `powf`, which is accurate to a few ulps.
const POW_SLACK: f64 = 8.0 * f64::EPSILON;

#[derive(Clone, Debug, PartialEq)]
pub enum Value {
    Exact(BigRational),
    Enclosure { lo: f64, hi: f64 },
}

fn down(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        x.next_down()
    }
}

fn up(x: f64) -> f64 {
    x.next_up()
}

fn enclose(r: &BigRational) -> (f64, f64) {
    let f = r.to_f64().unwrap_or(f64::INFINITY);
    if r.is_zero() {
        (0.0, 0.0)
    } else {
        (down(f), up(f))
    }
}

impl Value {
    pub fn zero() -> Self {
        Value::Exact(BigRational::zero())
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, Value::Exact(_))
    }

    pub fn exact(&self) -> Option<&BigRational> {
        match self {
            Value::Exact(r) => Some(r),
            Value::Enclosure { .. } => None,
        }
    }

    pub fn bounds(&self) -> (f64, f64) {
        match self {
            Value::Exact(r) => enclose(r),
            Value::Enclosure { lo, hi } => (*lo, *hi),
        }
    }

    /// Midpoint, for display and heuristics.
    pub fn approx(&self) -> f64 {
        match self {
            Value::Exact(r) => r.to_f64().unwrap_or(f64::INFINITY),
            Value::Enclosure { lo, hi } => lo + (hi - lo) / 2.0,
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Value::Exact(r) => r.is_zero(),
            Value::Enclosure { hi, .. } => *hi == 0.0,
        }
    }

    pub fn add(&self, other: &Value) -> Value {
        match (self, other) {
            (Value::Exact(a), Value::Exact(b)) => Value::Exact(a + b),
            _ => {
                let ((a, b), (c, d)) = (self.bounds(), other.bounds());
                Value::Enclosure {
                    lo: down(a + c),
                    hi: up(b + d),
                }
            }
        }
    }

    pub fn mul(&self, other: &Value) -> Value {
        match (self, other) {
            (Value::Exact(a), Value::Exact(b)) => Value::Exact(a * b),
            _ => {
                let ((a, b), (c, d)) = (self.bounds(), other.bounds());
                let lo = if a == 0.0 || c == 0.0 {
                    0.0
                } else {
                    down(a * c)
                };
                Value::Enclosure { lo, hi: up(b * d) }
            }
        }
    }

    pub fn mul_rational(&self, r: &BigRational) -> Value {
        match self {
            Value::Exact(a) => Value::Exact(a * r),
            _ => self.mul(&Value::Exact(r.clone())),
        }
    }

    pub fn powu(&self, exp: u32) -> Value {
        match self {
            Value::Exact(r) => Value::Exact(num_traits::pow(r.clone(), exp as usize)),
            Value::Enclosure { .. } if exp == 0 => Value::Exact(num_traits::One::one()),
            Value::Enclosure { .. } => (1..exp).fold(self.clone(), |acc, _| acc.mul(self)),
        }
    }

    /// `self^e` for a rational exponent `e > 0`; exact when the result is.
    pub fn pow_rational(&self, e: &BigRational) -> Result<Value> {
        if *e <= BigRational::zero() {
            return Err(Error::domain("exponent must be positive"));
        }
        if let Value::Exact(r) = self {
            if let Some(v) = exact_rational_pow(r, e) {
                return Ok(Value::Exact(v));
            }
        }
        let ef = e
            .to_f64()
            .ok_or_else(|| Error::domain("exponent out of range"))?;
        let (lo, hi) = self.bounds();
        Ok(Value::Enclosure {
            lo: down(lo.powf(ef) * (1.0 - POW_SLACK)),
            hi: up(hi.powf(ef) * (1.0 + POW_SLACK)),
        })
    }

    /// `c · h^{−τ}` for a positive integer `h`.
    pub fn power_law(c: &BigRational, h: u64, tau: &BigRational) -> Result<Value> {
        let base = BigRational::from_integer(h.into());
        if let Some(p) = exact_rational_pow(&base, &-tau.clone()) {
            return Ok(Value::Exact(c * p));
        }
        let tf = tau
            .to_f64()
            .ok_or_else(|| Error::domain("exponent out of range"))?;
        let p = (h as f64).powf(-tf);
        let (clo, chi) = enclose(c);
        Ok(Value::Enclosure {
            lo: down(clo * p * (1.0 - POW_SLACK)),
            hi: up(chi * p * (1.0 + POW_SLACK)),
        })
    }

    /// `Some(ordering)` when the enclosure decides the comparison.
    pub fn cmp_rational(&self, r: &BigRational) -> Option<Ordering> {
        match self {
            Value::Exact(v) => Some(v.cmp(r)),
            Value::Enclosure { .. } => self.partial_cmp_value(&Value::Exact(r.clone())),
        }
    }

    pub fn partial_cmp_value(&self, other: &Value) -> Option<Ordering> {
        match (self, other) {
            (Value::Exact(a), Value::Exact(b)) => Some(a.cmp(b)),
            _ => {
                let ((a, b), (c, d)) = (self.bounds(), other.bounds());
                if b < c {
                    Some(Ordering::Less)
                } else if a > d {
                    Some(Ordering::Greater)
                } else {
                    None
                }
            }
        }
    }

    /// Rigorous maximum; exact when both operands are.
    pub fn max(&self, other: &Value) -> Value {
        match self.partial_cmp_value(other) {
            Some(Ordering::Less) => other.clone(),
            Some(_) => self.clone(),
            None => {
                let ((a, b), (c, d)) = (self.bounds(), other.bounds());
                Value::Enclosure {
                    lo: a.max(c),
                    hi: b.max(d),
                }
            }
        }
    }

    pub fn require_exact(&self, op: &'static str) -> Result<&BigRational> {
        self.exact()
            .ok_or_else(|| Error::pre(op, "needs an exactly rational ψ value"))
    }
}

impl From<BigRational> for Value {
    fn from(r: BigRational) -> Self {
        Value::Exact(r)
    }
}

impl Serialize for Value {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Value::Exact(r) => crate::report::ser_rational(r, s),
            Value::Enclosure { lo, hi } => {
                let mid = lo + (hi - lo) / 2.0;
                let err = up((hi - mid).max(mid - lo));
                let mut map = s.serialize_map(Some(2))?;
                map.serialize_entry("value", &mid)?;
                map.serialize_entry("abs_error", &err)?;
                map.end()
            }
        }
    }
}
