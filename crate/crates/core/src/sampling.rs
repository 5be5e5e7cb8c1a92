//! Reproducible sampling of points in `[0,1)^k` and exact membership tests.
//!
//! Coordinates are dyadic rationals `X / 2^128`, drawn from a ChaCha stream
//! selected by the sample index, so a sample depends only on
//! `(seed, index, coordinate)` and never on scheduling. Linear forms `q·x`
//! are evaluated exactly in 128.128 fixed point; threshold comparisons use a
//! float filter and fall back to big-integer arithmetic near the boundary.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::Value as Json;

use crate::error::{Error, Result};

pub const DEFAULT_BITS: u32 = 128;

const TWO_POW_128: f64 = 340_282_366_920_938_463_463_374_607_431_768_211_456.0;

#[derive(Clone, Debug)]
pub struct PointSampler {
    seed: u64,
    dims: usize,
    mask: u128,
}

impl PointSampler {
    /// `bits` fractional bits per coordinate, `1..=128`.
    pub fn new(seed: u64, dims: usize, bits: u32) -> Result<Self> {
        if !(1..=128).contains(&bits) {
            return Err(Error::domain("sample precision must be 1..=128 bits"));
        }
        let mask = if bits == 128 {
            u128::MAX
        } else {
            !(u128::MAX >> bits)
        };
        Ok(PointSampler { seed, dims, mask })
    }

    fn stream(&self, index: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(index);
        rng
    }

    /// Numerators (over `2^128`) of the coordinates of sample `index`.
    pub fn point(&self, index: u64) -> Vec<u128> {
        let mut rng = self.stream(index);
        (0..self.dims).map(|_| self.draw(&mut rng)).collect()
    }

    /// A single coordinate, addressed directly by position in the stream.
    pub fn coordinate(&self, index: u64, coord: usize) -> u128 {
        let mut rng = self.stream(index);
        rng.set_word_pos(coord as u128 * 4);
        self.draw(&mut rng)
    }

    fn draw(&self, rng: &mut ChaCha8Rng) -> u128 {
        let hi = rng.next_u64() as u128;
        let lo = rng.next_u64() as u128;
        ((hi << 64) | lo) & self.mask
    }
}

/// `int + frac / 2^128`, `frac ∈ [0, 2^128)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Fixed {
    pub int: i128,
    pub frac: u128,
}

impl Fixed {
    pub const ZERO: Fixed = Fixed { int: 0, frac: 0 };

    pub fn from_numerator(x: u128) -> Self {
        Fixed { int: 0, frac: x }
    }

    fn add(self, other: Fixed) -> Fixed {
        let (frac, carry) = self.frac.overflowing_add(other.frac);
        Fixed {
            int: self.int + other.int + i128::from(carry),
            frac,
        }
    }

    fn neg(self) -> Fixed {
        if self.frac == 0 {
            Fixed {
                int: -self.int,
                frac: 0,
            }
        } else {
            Fixed {
                int: -self.int - 1,
                frac: self.frac.wrapping_neg(),
            }
        }
    }

    /// `k · x` for `x = frac / 2^128` (no integer part).
    fn scale_fraction(k: u64, x: u128) -> Fixed {
        let k = k as u128;
        let lo = (x & u64::MAX as u128) * k;
        let hi = (x >> 64) * k;
        let (frac, carry) = lo.overflowing_add(hi << 64);
        Fixed {
            int: (hi >> 64) as i128 + i128::from(carry),
            frac,
        }
    }

    pub fn to_f64(self) -> f64 {
        self.int as f64 + self.frac as f64 / TWO_POW_128
    }

    pub fn to_rational(self) -> BigRational {
        BigRational::new(self.scaled(), BigInt::from(1u8) << 128)
    }

    /// `int · 2^128 + frac`.
    fn scaled(self) -> BigInt {
        (BigInt::from(self.int) << 128) + BigInt::from(self.frac)
    }
}

/// Exact value of `Σ q_i x_i` for dyadic coordinates `x_i`.
pub fn linear_form(q: &[i64], coords: impl IntoIterator<Item = u128>) -> Fixed {
    q.iter().zip(coords).fold(Fixed::ZERO, |acc, (&c, x)| {
        let term = Fixed::scale_fraction(c.unsigned_abs(), x);
        acc.add(if c < 0 { term.neg() } else { term })
    })
}

/// An exact rational paired with its float approximation.
#[derive(Clone, Debug, PartialEq)]
pub struct Threshold {
    pub exact: BigRational,
    pub approx: f64,
}

impl Threshold {
    pub fn new(exact: BigRational) -> Self {
        let approx = exact.to_f64().unwrap_or(f64::INFINITY);
        Threshold { exact, approx }
    }
}

/// Counts integers `p` with `|y − offset − p| < radius` that pass `accept`,
/// stopping early once `limit` have been found.
pub fn count_within(
    y: &Fixed,
    offset: Option<&Threshold>,
    radius: &Threshold,
    mut accept: impl FnMut(i128) -> bool,
    limit: u64,
) -> u64 {
    if !radius.exact.is_positive() {
        return 0;
    }
    let y_f = y.to_f64();
    let c_f = offset.map_or(0.0, |c| c.approx);
    let t_f = y_f - c_f;
    let r_f = radius.approx;
    let tol = (1.0 + y_f.abs() + c_f.abs() + r_f) * 2f64.powi(-40);
    let lo = (t_f - r_f - tol).floor() as i128;
    let hi = (t_f + r_f + tol).ceil() as i128;
    let mut found = 0;
    for p in lo..=hi {
        let d_f = (t_f - p as f64).abs();
        let inside = if d_f < r_f - tol {
            true
        } else if d_f > r_f + tol {
            false
        } else {
            exact_within(y, offset, &radius.exact, p)
        };
        if inside && accept(p) {
            found += 1;
            if found >= limit {
                break;
            }
        }
    }
    found
}

fn exact_within(y: &Fixed, offset: Option<&Threshold>, radius: &BigRational, p: i128) -> bool {
    let scale = BigInt::from(1u8) << 128;
    let diff = y.scaled() - BigInt::from(p) * &scale;
    let (cn, cd) = match offset {
        Some(c) => (c.exact.numer().clone(), c.exact.denom().clone()),
        None => (BigInt::zero(), BigInt::from(1u8)),
    };
    let gap: BigInt = diff * &cd - cn * &scale;
    let lhs = gap.abs() * radius.denom();
    let rhs = radius.numer() * cd * scale;
    lhs < rhs
}

/// Number of indices in `0..samples` for which `hit` holds. Parallel over
/// the current rayon pool; the count is independent of the thread count.
pub fn count_hits(samples: u64, hit: impl Fn(u64) -> bool + Sync) -> u64 {
    (0..samples).into_par_iter().filter(|&i| hit(i)).count() as u64
}

/// Hit statistics of a seeded Monte Carlo run.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct McReport {
    pub samples: u64,
    pub hits: u64,
    pub fraction: f64,
    pub stderr: f64,
    pub seed: u64,
    pub parameters: Json,
}

impl McReport {
    pub fn new(samples: u64, hits: u64, seed: u64, parameters: Json) -> Self {
        let fraction = if samples == 0 {
            0.0
        } else {
            hits as f64 / samples as f64
        };
        let stderr = if samples == 0 {
            0.0
        } else {
            (fraction * (1.0 - fraction) / samples as f64).sqrt()
        };
        McReport {
            samples,
            hits,
            fraction,
            stderr,
            seed,
            parameters,
        }
    }

    /// Whether `value` lies within `k` standard errors of the estimate.
    pub fn agrees_with(&self, value: f64, k: f64) -> bool {
        (self.fraction - value).abs() <= k * self.stderr
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::rat;
    use proptest::prelude::*;

    #[test]
    fn samples_are_reproducible_and_addressable() {
        let s = PointSampler::new(42, 3, 128).unwrap();
        assert_eq!(s.point(7), s.point(7));
        assert_ne!(s.point(7), s.point(8));
        for c in 0..3 {
            assert_eq!(s.point(7)[c], s.coordinate(7, c));
        }
        let coarse = PointSampler::new(42, 3, 8).unwrap();
        assert_eq!(coarse.point(7)[0] & (u128::MAX >> 8), 0);
        assert!(PointSampler::new(1, 1, 0).is_err());
    }

    #[test]
    fn fixed_linear_form_small_cases() {
        let half = 1u128 << 127;
        let y = linear_form(&[3], [half]);
        assert_eq!(y, Fixed { int: 1, frac: half });
        let y = linear_form(&[-3], [half]);
        assert_eq!(
            y,
            Fixed {
                int: -2,
                frac: half
            }
        );
        assert_eq!(y.to_rational(), rat(-3, 2));
    }

    #[test]
    fn boundary_is_strict() {
        // y = 1/2, radius 1/2: p = 0 and p = 1 both sit exactly on the boundary
        let y = Fixed::from_numerator(1u128 << 127);
        assert_eq!(
            count_within(&y, None, &Threshold::new(rat(1, 2)), |_| true, u64::MAX),
            0
        );
        let r = Threshold::new(rat(1, 2) + BigRational::new(1.into(), BigInt::from(1u8) << 200));
        assert_eq!(count_within(&y, None, &r, |_| true, u64::MAX), 2);
        assert_eq!(
            count_within(&y, None, &Threshold::new(rat(0, 1)), |_| true, u64::MAX),
            0
        );
    }

    #[test]
    fn offset_shifts_target() {
        let y = Fixed::from_numerator(1u128 << 126); // 1/4
        let off = Threshold::new(rat(1, 4));
        let r = Threshold::new(rat(1, 100));
        assert_eq!(count_within(&y, Some(&off), &r, |_| true, u64::MAX), 1);
        assert_eq!(count_within(&y, None, &r, |_| true, u64::MAX), 0);
    }

    #[test]
    fn report_statistics() {
        let r = McReport::new(100, 25, 1, Json::Null);
        assert_eq!(r.fraction, 0.25);
        assert!((r.stderr - (0.25f64 * 0.75 / 100.0).sqrt()).abs() < 1e-15);
        assert!(r.agrees_with(0.3, 2.0));
    }

    fn brute_count(y: &BigRational, off: &BigRational, r: &BigRational) -> u64 {
        let t = y - off;
        let lo = (&t - r).floor().to_integer().to_i128().unwrap() - 1;
        let hi = (&t + r).ceil().to_integer().to_i128().unwrap() + 1;
        (lo..=hi)
            .filter(|&p| (&t - BigRational::from_integer(p.into())).abs() < *r)
            .count() as u64
    }

    proptest! {
        #[test]
        fn linear_form_is_exact(q in proptest::collection::vec(-1000i64..1000, 1..4), seed in 0u64..1000) {
            let s = PointSampler::new(seed, q.len(), 128).unwrap();
            let x = s.point(0);
            let got = linear_form(&q, x.iter().copied()).to_rational();
            let want = q.iter().zip(&x).fold(BigRational::zero(), |acc, (&c, &xi)| {
                acc + BigRational::from_integer(c.into()) * Fixed::from_numerator(xi).to_rational()
            });
            prop_assert_eq!(got, want);
        }

        #[test]
        fn count_within_matches_rational_brute_force(
            q in 1i64..500, seed in 0u64..500, rn in 0i64..40, rd in 1i64..30, on in -5i64..5, od in 1i64..7
        ) {
            let s = PointSampler::new(seed, 1, 128).unwrap();
            let y = linear_form(&[q], s.point(0));
            let r = rat(rn, rd);
            let off = rat(on, od);
            let got = count_within(&y, Some(&Threshold::new(off.clone())), &Threshold::new(r.clone()), |_| true, u64::MAX);
            prop_assert_eq!(got, brute_count(&y.to_rational(), &off, &r));
        }
    }
}
