//! One-dimensional geometry on the circle `T¹ = [0, 1)`.
//!
//! [`ArcUnion`] is the exact atom behind every measure in this crate: a
//! finite union of half-open arcs kept in a unique canonical form, so two
//! unions describing the same point set compare equal.

use std::collections::BTreeSet;

use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::arith::{gcd_i64, primitive_part, totient, vec_gcd, IntVec};
use crate::error::{Error, Result};
use crate::sampling::{self, McReport, PointSampler, Threshold};
use crate::scalar::{parse_rational, Scalar};

/// Canonical union of half-open arcs `[left, right)` with
/// `0 ≤ left < right ≤ 1`, sorted, pairwise disjoint and non-adjacent.
/// Arcs crossing 0 are split there.
#[derive(Clone, Debug, PartialEq)]
pub struct ArcUnion<T> {
    arcs: Vec<(T, T)>,
}

impl<T: Scalar> Default for ArcUnion<T> {
    fn default() -> Self {
        Self::empty()
    }
}

impl<T: Scalar> ArcUnion<T> {
    pub fn empty() -> Self {
        ArcUnion { arcs: Vec::new() }
    }

    pub fn full() -> Self {
        ArcUnion {
            arcs: vec![(T::zero(), T::one())],
        }
    }

    /// Union of real-line intervals `[l, r)` projected to the circle.
    /// Empty or reversed intervals are dropped.
    pub fn from_intervals<I: IntoIterator<Item = (T, T)>>(intervals: I) -> Self {
        let mut pieces = Vec::new();
        for (l, r) in intervals {
            if r.partial_cmp(&l) != Some(std::cmp::Ordering::Greater) {
                continue;
            }
            let len = r - l.clone();
            if len >= T::one() {
                return Self::full();
            }
            let l0 = l.frac();
            let r0 = l0.clone() + len;
            if r0 <= T::one() {
                pieces.push((l0, r0));
            } else {
                pieces.push((l0, T::one()));
                pieces.push((T::zero(), r0 - T::one()));
            }
        }
        Self::normalize(pieces)
    }

    /// Union of open balls `(c − r, c + r)`; measure-equivalent to the
    /// half-open representation.
    pub fn from_balls<'a, I: IntoIterator<Item = &'a T>>(centers: I, radius: &T) -> Self {
        Self::from_intervals(
            centers
                .into_iter()
                .map(|c| (c.clone() - radius.clone(), c.clone() + radius.clone())),
        )
    }

    fn normalize(mut pieces: Vec<(T, T)>) -> Self {
        pieces.sort_by(|a, b| {
            a.0.partial_cmp(&b.0)
                .expect("arc endpoints must be ordered")
        });
        let mut arcs: Vec<(T, T)> = Vec::with_capacity(pieces.len());
        for (l, r) in pieces {
            match arcs.last_mut() {
                Some(last) if l <= last.1 => {
                    if r > last.1 {
                        last.1 = r;
                    }
                }
                _ => arcs.push((l, r)),
            }
        }
        ArcUnion { arcs }
    }

    pub fn arcs(&self) -> &[(T, T)] {
        &self.arcs
    }

    pub fn len(&self) -> usize {
        self.arcs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.arcs.is_empty()
    }

    pub fn is_full(&self) -> bool {
        self.arcs.len() == 1 && self.arcs[0].0.is_zero() && self.arcs[0].1.is_one()
    }

    pub fn measure(&self) -> T {
        self.arcs
            .iter()
            .fold(T::zero(), |acc, (l, r)| acc + (r.clone() - l.clone()))
    }

    pub fn union(&self, other: &Self) -> Self {
        Self::normalize(self.arcs.iter().chain(other.arcs.iter()).cloned().collect())
    }

    pub fn intersect(&self, other: &Self) -> Self {
        let (a, b) = (&self.arcs, &other.arcs);
        let (mut i, mut j) = (0, 0);
        let mut out = Vec::new();
        while i < a.len() && j < b.len() {
            let lo = T::max_of(a[i].0.clone(), b[j].0.clone());
            let hi = T::min_of(a[i].1.clone(), b[j].1.clone());
            if hi > lo {
                out.push((lo, hi));
            }
            if a[i].1 < b[j].1 {
                i += 1;
            } else {
                j += 1;
            }
        }
        // pieces are already sorted and disjoint; adjacency can only arise
        // where both inputs were adjacent, which canonical inputs exclude
        Self::normalize(out)
    }

    pub fn complement(&self) -> Self {
        let mut out = Vec::new();
        let mut cursor = T::zero();
        for (l, r) in &self.arcs {
            if *l > cursor {
                out.push((cursor.clone(), l.clone()));
            }
            cursor = r.clone();
        }
        if cursor < T::one() {
            out.push((cursor, T::one()));
        }
        ArcUnion { arcs: out }
    }

    pub fn contains(&self, x: &T) -> bool {
        let x = x.frac();
        self.arcs.iter().any(|(l, r)| *l <= x && x < *r)
    }
}

impl Serialize for ArcUnion<BigRational> {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let pairs: Vec<[[String; 2]; 2]> = self
            .arcs
            .iter()
            .map(|(l, r)| {
                [
                    [l.numer().to_string(), l.denom().to_string()],
                    [r.numer().to_string(), r.denom().to_string()],
                ]
            })
            .collect();
        pairs.serialize(s)
    }
}

impl<'de> Deserialize<'de> for ArcUnion<BigRational> {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw: Vec<[[String; 2]; 2]> = Vec::deserialize(d)?;
        let endpoint = |p: &[String; 2]| {
            parse_rational(&format!("{}/{}", p[0], p[1]))
                .ok_or_else(|| D::Error::custom(format!("bad endpoint {}/{}", p[0], p[1])))
        };
        let mut arcs = Vec::with_capacity(raw.len());
        for [l, r] in &raw {
            arcs.push((endpoint(l)?, endpoint(r)?));
        }
        let canon = ArcUnion::normalize(arcs.clone());
        let in_range = arcs
            .iter()
            .all(|(l, r)| *l >= BigRational::zero() && r > l && *r <= BigRational::one());
        if !in_range || canon.arcs != arcs {
            return Err(D::Error::custom("arc list is not in canonical form"));
        }
        Ok(canon)
    }
}

/// Which numerators `p` are admissible around the centers `p/d`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum NumeratorMode {
    /// Every residue: the set `A`.
    Plain,
    /// Residues coprime to the scale: the set `A′`.
    Coprime,
    /// A prescribed subset of coprime residues: the set `A″`.
    Filtered { numerators: BTreeSet<i64> },
}

impl NumeratorMode {
    /// Admissible residues in `0..d`.
    pub fn residues(&self, d: u64) -> Result<Vec<i64>> {
        let di = d as i64;
        match self {
            NumeratorMode::Plain => Ok((0..di).collect()),
            NumeratorMode::Coprime => Ok((0..di).filter(|&p| gcd_i64(p, di) == 1).collect()),
            NumeratorMode::Filtered { numerators } => {
                for &p in numerators {
                    if !(0..di).contains(&p) || gcd_i64(p, di) != 1 {
                        return Err(Error::pre(
                            "approx_set_1d",
                            format!("filter residue {p} is not a unit modulo {d}"),
                        ));
                    }
                }
                Ok(numerators.iter().copied().collect())
            }
        }
    }

    /// Whether the integer `p` is admissible at scale `d`.
    pub fn admits(&self, p: i128, d: u64) -> bool {
        match self {
            NumeratorMode::Plain => true,
            NumeratorMode::Coprime => gcd_u128(p.unsigned_abs(), u128::from(d)) == 1,
            NumeratorMode::Filtered { numerators } => {
                let r = p.rem_euclid(i128::from(d)) as i64;
                numerators.contains(&r)
            }
        }
    }
}

fn gcd_u128(mut a: u128, mut b: u128) -> u128 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// `{x ∈ T¹ : ∃ admissible p, |d·x − p| < ε}` as a canonical arc union.
pub fn approx_set_1d<T: Scalar>(d: u64, epsilon: &T, mode: &NumeratorMode) -> Result<ArcUnion<T>> {
    if d == 0 {
        return Err(Error::domain("scale d must be positive"));
    }
    if *epsilon < T::zero() {
        return Err(Error::domain("epsilon must be nonnegative"));
    }
    let residues = mode.residues(d)?;
    if residues.is_empty() || epsilon.is_zero() {
        return Ok(ArcUnion::empty());
    }
    let dt = T::from_i64(d as i64);
    if epsilon.clone() * T::from_i64(2) >= dt {
        return Ok(ArcUnion::full());
    }
    let radius = epsilon.clone() / dt.clone();
    let centers: Vec<T> = residues
        .iter()
        .map(|&p| T::from_i64(p) / dt.clone())
        .collect();
    Ok(ArcUnion::from_balls(centers.iter(), &radius))
}

/// Disjoint-or-not family of equal-radius balls on the circle.
#[derive(Clone, Debug, PartialEq)]
pub struct BallFamily1D<T> {
    pub centers: Vec<T>,
    pub radius: T,
    pub disjoint: bool,
}

impl<T: Scalar> BallFamily1D<T> {
    pub fn new(centers: Vec<T>, radius: T) -> Result<Self> {
        if radius <= T::zero() {
            return Err(Error::domain("ball radius must be positive"));
        }
        let centers: Vec<T> = centers.into_iter().map(|c| c.frac()).collect();
        let disjoint = Self::check_disjoint(&centers, &radius);
        Ok(BallFamily1D {
            centers,
            radius,
            disjoint,
        })
    }

    fn check_disjoint(centers: &[T], radius: &T) -> bool {
        let diameter = radius.clone() * T::from_i64(2);
        if diameter > T::one() {
            return false;
        }
        if centers.len() < 2 {
            return true;
        }
        let mut sorted = centers.to_vec();
        sorted.sort_by(|a, b| a.partial_cmp(b).expect("centers must be ordered"));
        let wrap_gap = T::one() - sorted[sorted.len() - 1].clone() + sorted[0].clone();
        wrap_gap >= diameter
            && sorted
                .windows(2)
                .all(|w| w[1].clone() - w[0].clone() >= diameter)
    }

    pub fn to_union(&self) -> ArcUnion<T> {
        ArcUnion::from_balls(self.centers.iter(), &self.radius)
    }
}

/// Concentric scaling `σ • I`: same centers, radius times `σ`.
pub fn scale_concentric<T: Scalar>(family: &BallFamily1D<T>, sigma: &T) -> Result<BallFamily1D<T>> {
    if !family.disjoint {
        return Err(Error::pre("scale_concentric", "family is not disjoint"));
    }
    if *sigma <= T::zero() || *sigma > T::one() {
        return Err(Error::domain("sigma must lie in (0, 1]"));
    }
    Ok(BallFamily1D {
        centers: family.centers.clone(),
        radius: family.radius.clone() * sigma.clone(),
        disjoint: true,
    })
}

/// Greedy `1/φ(d)`-separated subset of the units modulo `d`, scanning
/// numerators upward and keeping the first. Separation is measured on the
/// circle, including the wrap from the last kept numerator to the first.
pub fn select_separated_numerators(d: u64) -> Result<BTreeSet<i64>> {
    let phi = totient(d)?;
    let di = d as i64;
    let mut kept: Vec<i64> = Vec::new();
    for p in (0..di).filter(|&p| gcd_i64(p, di) == 1) {
        let ok = match (kept.first(), kept.last()) {
            (Some(&first), Some(&last)) => {
                // (p − last)/d ≥ 1/φ(d) and (d − (p − first))/d ≥ 1/φ(d)
                (p - last) as u128 * phi as u128 >= d as u128
                    && (di - (p - first)) as u128 * phi as u128 >= d as u128
            }
            _ => true,
        };
        if ok {
            kept.push(p);
        }
    }
    Ok(kept.into_iter().collect())
}

/// One approximation set `A_{n,m}(q, ε)`, `A′` or `A″`.
#[derive(Clone, Debug, PartialEq)]
pub struct ApproxSet<T> {
    pub n: usize,
    pub m: u32,
    pub q: IntVec,
    pub epsilon: T,
    pub mode: NumeratorMode,
}

impl<T: Scalar> ApproxSet<T> {
    pub fn new(n: usize, m: u32, q: IntVec, epsilon: T, mode: NumeratorMode) -> Result<Self> {
        if n == 0 || m == 0 {
            return Err(Error::domain("n and m must be positive"));
        }
        if q.len() != n {
            return Err(Error::Dimension(format!(
                "q has {} components, expected n = {n}",
                q.len()
            )));
        }
        if q.is_zero() {
            return Err(Error::domain("direction q must be nonzero"));
        }
        if !q.in_orthant() {
            return Err(Error::domain("q must lie in the nonnegative orthant"));
        }
        if epsilon < T::zero() {
            return Err(Error::domain("epsilon must be nonnegative"));
        }
        let set = ApproxSet {
            n,
            m,
            q,
            epsilon,
            mode,
        };
        set.mode.residues(set.scale())?;
        Ok(set)
    }

    /// `gcd(q)`.
    pub fn scale(&self) -> u64 {
        vec_gcd(&self.q).expect("validated nonzero")
    }

    pub fn direction(&self) -> IntVec {
        primitive_part(&self.q)
            .expect("validated nonzero")
            .direction
    }

    /// The one-dimensional set at scale `gcd(q)` this set projects onto.
    pub fn reduced(&self) -> Result<ArcUnion<T>> {
        approx_set_1d(self.scale(), &self.epsilon, &self.mode)
    }
}

/// Monte Carlo estimate of `Leb(E(q₁, v₁, ε₁) ∩ E(q₂, v₂, ε₂))`, where
/// `E(q, v, ε) = π({x : |q·x| < ε} + v)`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StripeEstimate {
    pub estimate: f64,
    #[serde(serialize_with = "crate::report::ser_rational")]
    pub product: BigRational,
    pub stderr: f64,
    pub report: McReport,
}

pub struct Stripe<'a> {
    pub q: &'a IntVec,
    pub offset: &'a [BigRational],
    pub epsilon: &'a BigRational,
}

pub fn stripe_independence_estimate(
    first: Stripe<'_>,
    second: Stripe<'_>,
    samples: u64,
    seed: u64,
) -> Result<StripeEstimate> {
    let n = first.q.len();
    if n < 2 || second.q.len() != n || first.offset.len() != n || second.offset.len() != n {
        return Err(Error::Dimension(
            "stripes need n ≥ 2 and matching lengths".into(),
        ));
    }
    if !linearly_independent(first.q, second.q) {
        return Err(Error::domain("stripe directions are linearly dependent"));
    }
    for s in [&first, &second] {
        if *s.epsilon <= BigRational::zero() {
            return Err(Error::domain("stripe width must be positive"));
        }
    }
    let prep = |s: &Stripe<'_>| {
        let shift: BigRational =
            s.q.components()
                .iter()
                .zip(s.offset)
                .map(|(&c, v)| BigRational::from_i64(c) * v)
                .fold(BigRational::zero(), |a, b| a + b);
        (
            s.q.components().to_vec(),
            Threshold::new(shift),
            Threshold::new(s.epsilon.clone()),
        )
    };
    let (q1, shift1, eps1) = prep(&first);
    let (q2, shift2, eps2) = prep(&second);
    let sampler = PointSampler::new(seed, n, sampling::DEFAULT_BITS)?;
    let hits = sampling::count_hits(samples, |i| {
        let x = sampler.point(i);
        let y1 = sampling::linear_form(&q1, x.iter().copied());
        if sampling::count_within(&y1, Some(&shift1), &eps1, |_| true, 1) == 0 {
            return false;
        }
        let y2 = sampling::linear_form(&q2, x.iter().copied());
        sampling::count_within(&y2, Some(&shift2), &eps2, |_| true, 1) > 0
    });
    let one = BigRational::one();
    let two = BigRational::from_i64(2);
    let m1 = BigRational::min_of(one.clone(), two.clone() * first.epsilon);
    let m2 = BigRational::min_of(one, two * second.epsilon);
    let report = McReport::new(
        samples,
        hits,
        seed,
        serde_json::json!({ "kind": "stripe_intersection", "q1": first.q, "q2": second.q }),
    );
    Ok(StripeEstimate {
        estimate: report.fraction,
        product: m1 * m2,
        stderr: report.stderr,
        report,
    })
}

/// Linear independence of two integer vectors over `Q`.
pub fn linearly_independent(a: &IntVec, b: &IntVec) -> bool {
    let (a, b) = (a.components(), b.components());
    if a.iter().all(|&c| c == 0) || b.iter().all(|&c| c == 0) {
        return false;
    }
    (0..a.len()).any(|i| {
        (i + 1..a.len())
            .any(|j| i128::from(a[i]) * i128::from(b[j]) != i128::from(a[j]) * i128::from(b[i]))
    })
}
