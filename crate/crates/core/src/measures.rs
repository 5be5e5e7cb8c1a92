//! Exact measures and pairwise intersections of approximation sets in all
//! dimensions, the classical overlap bound, Chung–Erdős lower bounds and
//! window selection.
//!
//! Every `n`-dimensional measure is computed by projection: `A_{n,m}(q, ε)`
//! is the preimage of the one-dimensional set at scale `gcd(q)` under
//! `x ↦ q′·x`, and its `m` columns are independent, so
//! `Leb(A_{n,m}(q, ε)) = Leb(A_{1,1}(gcd q, ε))^m`.

use num_rational::BigRational;
use rayon::prelude::*;
use serde::Serialize;

use crate::arith::{distinct_primes, totient};
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::torus::{approx_set_1d, ApproxSet, ArcUnion, NumeratorMode};

pub fn measure_a<T: Scalar>(set: &ApproxSet<T>) -> Result<T> {
    Ok(set.reduced()?.measure().powu(set.m))
}

pub fn measure_intersection<T: Scalar>(a: &ApproxSet<T>, b: &ApproxSet<T>) -> Result<T> {
    if a.n != b.n || a.m != b.m {
        return Err(Error::Dimension(format!(
            "(n, m) = ({}, {}) against ({}, {})",
            a.n, a.m, b.n, b.m
        )));
    }
    if a.direction() == b.direction() {
        Ok(a.reduced()?.intersect(&b.reduced()?).measure().powu(a.m))
    } else {
        // distinct primitive directions in the orthant are linearly
        // independent, so the two sets are independent
        Ok(measure_a(a)? * measure_a(b)?)
    }
}

/// `(φ(d)·ε/d)^m`, the guaranteed lower bound for `ε ≤ d/(2φ(d))`.
pub fn lower_bound_measure<T: Scalar>(d: u64, epsilon: &T, m: u32) -> Result<T> {
    let phi = totient(d)?;
    let bound = T::from_ratio(d as i64, 2 * phi as i64);
    if *epsilon > bound {
        return Err(Error::pre(
            "lower_bound_measure",
            "epsilon exceeds d/(2φ(d))",
        ));
    }
    if *epsilon < T::zero() {
        return Err(Error::domain("epsilon must be nonnegative"));
    }
    Ok((T::from_ratio(phi as i64, d as i64) * epsilon.clone()).powu(m))
}

/// `(2φ(d)·ε/d)^m`, the union bound.
pub fn upper_bound_measure<T: Scalar>(d: u64, epsilon: &T, m: u32) -> Result<T> {
    let phi = totient(d)?;
    Ok((T::from_ratio(2 * phi as i64, d as i64) * epsilon.clone()).powu(m))
}

/// Ratio of an exact intersection to its bound.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", content = "value", rename_all = "snake_case")]
#[serde(bound(serialize = ""))]
pub enum OverlapRatio<T: Scalar> {
    #[serde(serialize_with = "crate::report::ser_scalar")]
    Finite(T),
    /// `lhs > 0` while the bound is `0`.
    Infinite,
    /// `0 / 0`.
    Indeterminate,
}

/// One pair `(k, ℓ)` of the overlap estimate
/// `Leb(A′(k,Ψk) ∩ A′(ℓ,Ψℓ)) ≪ 1_{M ≥ gcd} (φ(k)Ψk/k)(φ(ℓ)Ψℓ/ℓ) Π(1 + 1/p)`
/// with `M = max(ℓΨk, kΨℓ)` and the product over primes `p | kℓ/gcd²`,
/// `p > M/gcd`.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(bound(serialize = ""))]
pub struct OverlapReport<T: Scalar> {
    pub k: u64,
    pub l: u64,
    pub gcd: u64,
    #[serde(serialize_with = "crate::report::ser_scalar")]
    pub lhs: T,
    #[serde(serialize_with = "crate::report::ser_scalar")]
    pub rhs: T,
    /// `M ≥ gcd(k, ℓ)`.
    pub indicator: bool,
    /// `2M ≥ gcd(k, ℓ)`: the exact necessary condition for the two sets to
    /// meet, since distinct reduced fractions `a/k`, `b/ℓ` sit at least
    /// `gcd/(kℓ)` apart.
    pub overlap_possible: bool,
    #[serde(rename = "M", serialize_with = "crate::report::ser_scalar")]
    pub big_m: T,
    pub ratio: OverlapRatio<T>,
}

impl<T: Scalar> OverlapReport<T> {
    pub fn ratio_value(&self) -> Option<&T> {
        match &self.ratio {
            OverlapRatio::Finite(r) => Some(r),
            _ => None,
        }
    }
}

fn overlap_hypothesis<T: Scalar>(d: u64, psi: &T) -> Result<()> {
    if *psi < T::zero() {
        return Err(Error::domain(format!("Ψ({d}) is negative")));
    }
    let phi = totient(d)?;
    if psi.clone() * T::from_i64(2 * phi as i64) > T::from_i64(d as i64) {
        return Err(Error::pre(
            "pv_overlap_bound",
            format!("Ψ({d}) exceeds {d}/(2φ({d}))"),
        ));
    }
    Ok(())
}

pub fn pv_overlap_bound<T: Scalar>(
    k: u64,
    l: u64,
    psi_k: &T,
    psi_l: &T,
) -> Result<OverlapReport<T>> {
    let lhs = coprime_intersection(k, psi_k, l, psi_l)?;
    overlap_report(k, l, psi_k, psi_l, lhs)
}

fn coprime_intersection<T: Scalar>(k: u64, psi_k: &T, l: u64, psi_l: &T) -> Result<T> {
    let a = approx_set_1d(k, psi_k, &NumeratorMode::Coprime)?;
    let b = approx_set_1d(l, psi_l, &NumeratorMode::Coprime)?;
    Ok(a.intersect(&b).measure())
}

fn overlap_report<T: Scalar>(
    k: u64,
    l: u64,
    psi_k: &T,
    psi_l: &T,
    lhs: T,
) -> Result<OverlapReport<T>> {
    if k == l {
        return Err(Error::pre("pv_overlap_bound", "k and ℓ must differ"));
    }
    if k == 0 || l == 0 {
        return Err(Error::domain("k and ℓ must be positive"));
    }
    overlap_hypothesis(k, psi_k)?;
    overlap_hypothesis(l, psi_l)?;
    let g = num_integer::gcd(k, l);
    let gt = T::from_i64(g as i64);
    let big_m = T::max_of(
        T::from_i64(l as i64) * psi_k.clone(),
        T::from_i64(k as i64) * psi_l.clone(),
    );
    let indicator = big_m >= gt;
    let overlap_possible = big_m.clone() * T::from_i64(2) >= gt;
    let rhs = if indicator {
        let density = |d: u64, psi: &T| -> Result<T> {
            Ok(T::from_ratio(totient(d)? as i64, d as i64) * psi.clone())
        };
        let core = (k as u128 / g as u128) * (l as u128 / g as u128);
        let mut rhs = density(k, psi_k)? * density(l, psi_l)?;
        let threshold = big_m.clone() / gt.clone();
        for p in distinct_primes(u64::try_from(core).map_err(|_| Error::domain("kℓ too large"))?)?
        {
            if T::from_i64(p as i64) > threshold {
                rhs = rhs * (T::one() + T::from_ratio(1, p as i64));
            }
        }
        rhs
    } else {
        T::zero()
    };
    let ratio = match (lhs.is_zero(), rhs.is_zero()) {
        (_, false) => OverlapRatio::Finite(lhs.clone() / rhs.clone()),
        (true, true) => OverlapRatio::Indeterminate,
        (false, true) => OverlapRatio::Infinite,
    };
    Ok(OverlapReport {
        k,
        l,
        gcd: g,
        lhs,
        rhs,
        indicator,
        overlap_possible,
        big_m,
        ratio,
    })
}

/// A scanned pair: either a report or the reason it was skipped.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(untagged)]
#[serde(bound(serialize = ""))]
pub enum ScanEntry<T: Scalar> {
    Report(OverlapReport<T>),
    Skipped { k: u64, l: u64, skipped: String },
}

/// All pairs `1 ≤ k < ℓ ≤ k_max`, sorted by descending ratio (infinite
/// first, indeterminate and skipped last, ties by `(k, ℓ)`).
pub fn overlap_ratio_scan<T: Scalar>(
    psi: impl Fn(u64) -> T + Sync,
    k_max: u64,
) -> Vec<ScanEntry<T>> {
    let values: Vec<T> = (1..=k_max).map(&psi).collect();
    let sets: Vec<Result<ArcUnion<T>>> = (1..=k_max)
        .into_par_iter()
        .map(|d| approx_set_1d(d, &values[d as usize - 1], &NumeratorMode::Coprime))
        .collect();
    let pairs: Vec<(u64, u64)> = (1..=k_max)
        .flat_map(|k| (k + 1..=k_max).map(move |l| (k, l)))
        .collect();
    let mut entries: Vec<ScanEntry<T>> = pairs
        .par_iter()
        .map(|&(k, l)| {
            let (pk, pl) = (&values[k as usize - 1], &values[l as usize - 1]);
            let result = match (&sets[k as usize - 1], &sets[l as usize - 1]) {
                (Ok(a), Ok(b)) => overlap_report(k, l, pk, pl, a.intersect(b).measure()),
                (Err(e), _) | (_, Err(e)) => Err(e.clone()),
            };
            match result {
                Ok(r) => ScanEntry::Report(r),
                Err(e) => ScanEntry::Skipped {
                    k,
                    l,
                    skipped: e.to_string(),
                },
            }
        })
        .collect();
    entries.sort_by(|a, b| {
        use std::cmp::Ordering;
        let rank = |e: &ScanEntry<T>| match e {
            ScanEntry::Report(r) => match r.ratio {
                OverlapRatio::Infinite => 0,
                OverlapRatio::Finite(_) => 1,
                OverlapRatio::Indeterminate => 2,
            },
            ScanEntry::Skipped { .. } => 3,
        };
        let key = |e: &ScanEntry<T>| match e {
            ScanEntry::Report(r) => (r.k, r.l),
            ScanEntry::Skipped { k, l, .. } => (*k, *l),
        };
        rank(a).cmp(&rank(b)).then_with(|| {
            let by_ratio = match (a, b) {
                (ScanEntry::Report(x), ScanEntry::Report(y)) => {
                    match (x.ratio_value(), y.ratio_value()) {
                        (Some(rx), Some(ry)) => ry.partial_cmp(rx).unwrap_or(Ordering::Equal),
                        _ => Ordering::Equal,
                    }
                }
                _ => Ordering::Equal,
            };
            by_ratio.then_with(|| key(a).cmp(&key(b)))
        })
    });
    entries
}

/// `(Σ μ_i)² / Σ_{i,j} μ(A_i ∩ A_j)`.
pub fn chung_erdos_bound<T: Scalar>(mu: &[T], mu_pair: &[Vec<T>]) -> Result<T> {
    let n = mu.len();
    if mu_pair.len() != n || mu_pair.iter().any(|row| row.len() != n) {
        return Err(Error::Dimension(
            "pair matrix must be square and match mu".into(),
        ));
    }
    for i in 0..n {
        if mu_pair[i][i] != mu[i] {
            return Err(Error::pre(
                "chung_erdos_bound",
                format!("diagonal entry {i} differs from mu"),
            ));
        }
        for (j, row) in mu_pair.iter().enumerate().take(i) {
            if mu_pair[i][j] != row[i] {
                return Err(Error::pre(
                    "chung_erdos_bound",
                    "pair matrix is not symmetric",
                ));
            }
        }
    }
    if mu.iter().any(|m| *m < T::zero()) {
        return Err(Error::domain("measures must be nonnegative"));
    }
    let total = mu.iter().fold(T::zero(), |a, b| a + b.clone());
    if total.is_zero() {
        return Err(Error::domain("total measure is zero"));
    }
    let pairs = mu_pair
        .iter()
        .flatten()
        .fold(T::zero(), |a, b| a + b.clone());
    Ok(total.clone() * total / pairs)
}

/// Convenience: the Chung–Erdős bound for explicit arc unions, together with
/// the exact measure of their union.
pub fn chung_erdos_for_sets<T: Scalar>(sets: &[ArcUnion<T>]) -> Result<(T, T)> {
    let mu: Vec<T> = sets.iter().map(ArcUnion::measure).collect();
    let pair: Vec<Vec<T>> = sets
        .iter()
        .map(|a| sets.iter().map(|b| a.intersect(b).measure()).collect())
        .collect();
    let bound = chung_erdos_bound(&mu, &pair)?;
    let union = sets
        .iter()
        .fold(ArcUnion::empty(), |acc, s| acc.union(s))
        .measure();
    Ok((bound, union))
}

fn check_window_psi<T: Scalar>(d: u64, psi: &T) -> Result<()> {
    if *psi < T::zero() || *psi > T::half() {
        return Err(Error::pre(
            "window_pair_sum",
            format!("Ψ({d}) must lie in [0, 1/2]"),
        ));
    }
    Ok(())
}

/// `Σ_{x ≤ k < ℓ ≤ y} Leb(A′_{1,m}(k, Ψk) ∩ A′_{1,m}(ℓ, Ψℓ))`, exact.
pub fn window_pair_sum<T: Scalar>(
    psi: impl Fn(u64) -> T + Sync,
    x: u64,
    y: u64,
    m: u32,
) -> Result<T> {
    if x == 0 || y < x {
        return Err(Error::domain("window needs 1 ≤ X ≤ Y"));
    }
    let sets = (x..=y)
        .map(|d| {
            let v = psi(d);
            check_window_psi(d, &v)?;
            approx_set_1d(d, &v, &NumeratorMode::Coprime)
        })
        .collect::<Result<Vec<_>>>()?;
    let partials: Vec<T> = (0..sets.len())
        .into_par_iter()
        .map(|i| {
            sets[i + 1..].iter().fold(T::zero(), |acc, b| {
                acc + sets[i].intersect(b).measure().powu(m)
            })
        })
        .collect();
    // fixed summation order keeps float results partition independent
    Ok(partials.into_iter().fold(T::zero(), |a, b| a + b))
}

/// Outcome of a window search.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "outcome", rename_all = "snake_case")]
#[serde(bound(serialize = ""))]
pub enum WindowOutcome<T: Scalar> {
    Found {
        y: u64,
        #[serde(serialize_with = "crate::report::ser_scalar")]
        sum: T,
    },
    /// The partial sum jumped from at most the lower edge to at least the
    /// upper edge at `y`.
    Overshoot {
        y: u64,
        #[serde(serialize_with = "crate::report::ser_scalar")]
        sum: T,
    },
    /// `y_max` reached without entering the window.
    Exhausted {
        #[serde(serialize_with = "crate::report::ser_scalar")]
        sum: T,
    },
}

/// Window edges `((1/2)^{m−1}, (1/2)^{m−2})`.
pub fn window_edges<T: Scalar>(m: u32) -> (T, T) {
    let lower = T::half().powu(m - 1);
    let upper = lower.clone() * T::from_i64(2);
    (lower, upper)
}

/// Smallest `Y ≤ y_max` with `(1/2)^{m−1} < Σ_{X≤d≤Y} (φ(d)Ψ(d)/d)^m < (1/2)^{m−2}`.
pub fn find_window<T: Scalar>(
    psi: impl Fn(u64) -> T,
    m: u32,
    x: u64,
    y_max: u64,
) -> Result<WindowOutcome<T>> {
    if m == 0 || x == 0 {
        return Err(Error::domain("m and X must be positive"));
    }
    let (lower, upper) = window_edges::<T>(m);
    let mut sum = T::zero();
    for d in x..=y_max {
        let term = (T::from_ratio(totient(d)? as i64, d as i64) * psi(d)).powu(m);
        sum = sum + term;
        if sum > lower {
            return Ok(if sum < upper {
                WindowOutcome::Found { y: d, sum }
            } else {
                WindowOutcome::Overshoot { y: d, sum }
            });
        }
    }
    Ok(WindowOutcome::Exhausted { sum })
}

/// `Σ_{x≤d≤y} (φ(d)Ψ(d)/d)^m`.
pub fn window_mass<T: Scalar>(psi: impl Fn(u64) -> T, m: u32, x: u64, y: u64) -> Result<T> {
    (x..=y).try_fold(T::zero(), |acc, d| {
        Ok(acc + (T::from_ratio(totient(d)? as i64, d as i64) * psi(d)).powu(m))
    })
}

pub type ExactOverlapReport = OverlapReport<BigRational>;
