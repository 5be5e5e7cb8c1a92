//! The empirical side: exact solution enumeration for a given matrix,
//! seeded hit-fraction statistics, union-measure estimates, the Catlin
//! lifting map and the classical counterexample.
//!
//! A matrix `x` is `n × m`, stored as `n` rows of `m` entries; `q ∈ Zⁿ`
//! acts on it from the left, giving the `m` linear forms `(qx)_j`.

use std::collections::BTreeSet;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};
use serde::Serialize;
use serde_json::json;

use crate::arith::{divisor_sum, divisors, vec_gcd, IntVec, OrthantVectors};
use crate::error::{Error, Result};
use crate::psi::{catlin_bar, scaled, PsiSpec};
use crate::sampling::{self, Fixed, McReport, PointSampler, Threshold, DEFAULT_BITS};
use crate::torus::{ApproxSet, ArcUnion};

/// Exact `n × m` matrix.
pub type Matrix = Vec<Vec<BigRational>>;

/// One pair `(p, q)` with `|qx − p| < ψ(q)`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct Solution {
    pub q: IntVec,
    pub p: IntVec,
    /// `max_j |(qx)_j − p_j|`.
    #[serde(serialize_with = "crate::report::ser_rational")]
    pub residual: BigRational,
    /// `gcd(p_j, gcd(q)) = 1` for every `j`.
    pub coprime_ok: bool,
}

fn matrix_shape(x: &Matrix) -> Result<(usize, usize)> {
    let n = x.len();
    let m = x.first().map_or(0, Vec::len);
    if n == 0 || m == 0 || x.iter().any(|row| row.len() != m) {
        return Err(Error::Dimension(
            "x must be a nonempty rectangular n × m matrix".into(),
        ));
    }
    Ok((n, m))
}

/// The `m` values `(qx)_j`.
pub fn linear_forms(q: &IntVec, x: &Matrix) -> Result<Vec<BigRational>> {
    let (n, m) = matrix_shape(x)?;
    if q.len() != n {
        return Err(Error::Dimension(format!(
            "q has {} components, x has {n} rows",
            q.len()
        )));
    }
    Ok((0..m)
        .map(|j| {
            q.components()
                .iter()
                .zip(x)
                .fold(BigRational::zero(), |acc, (&c, row)| {
                    acc + &row[j] * BigInt::from(c)
                })
        })
        .collect())
}

fn ceil_int(r: &BigRational) -> BigInt {
    r.ceil().to_integer()
}

fn floor_int(r: &BigRational) -> BigInt {
    r.floor().to_integer()
}

/// Integers strictly inside `(y − ψ, y + ψ)`.
fn candidates(y: &BigRational, psi: &BigRational) -> Result<Vec<i64>> {
    let lo: BigInt = floor_int(&(y - psi)) + 1;
    let hi: BigInt = ceil_int(&(y + psi)) - 1;
    let (lo, hi) = match (lo.to_i64(), hi.to_i64()) {
        (Some(a), Some(b)) => (a, b),
        _ => return Err(Error::domain("numerator range exceeds 64 bits")),
    };
    Ok((lo..=hi).collect())
}

fn coprime_to(p: &[i64], g: u64) -> bool {
    p.iter().all(|&c| c.unsigned_abs().gcd(&g) == 1)
}

/// All solutions with `0 < |q| ≤ Q` in the orthant, ordered by `q` then
/// `p` lexicographically.
pub fn enumerate_solutions(
    x: &Matrix,
    spec: &PsiSpec,
    q_max: u64,
    coprime: bool,
) -> Result<Vec<Solution>> {
    let (n, _) = matrix_shape(x)?;
    if q_max == 0 {
        return Err(Error::domain("Q must be at least 1"));
    }
    spec.check_dimension(n)?;
    let mut out = Vec::new();
    for q in OrthantVectors::new(n, q_max) {
        let psi = spec.eval(&q)?.require_exact("enumerate_solutions")?.clone();
        if psi.is_zero() {
            continue;
        }
        let g = vec_gcd(&q)?;
        let ys = linear_forms(&q, x)?;
        let per_column = ys
            .iter()
            .map(|y| candidates(y, &psi))
            .collect::<Result<Vec<_>>>()?;
        for p in cartesian(&per_column) {
            let coprime_ok = coprime_to(&p, g);
            if coprime && !coprime_ok {
                continue;
            }
            let residual = ys
                .iter()
                .zip(&p)
                .map(|(y, &pj)| (y - BigRational::from_integer(pj.into())).abs())
                .fold(BigRational::zero(), |a, b| if b > a { b } else { a });
            out.push(Solution {
                q: q.clone(),
                p: IntVec(p),
                residual,
                coprime_ok,
            });
        }
    }
    Ok(out)
}

fn cartesian(lists: &[Vec<i64>]) -> Vec<Vec<i64>> {
    lists.iter().fold(vec![Vec::new()], |acc, list| {
        acc.iter()
            .flat_map(|prefix| {
                list.iter().map(move |&v| {
                    let mut next = prefix.clone();
                    next.push(v);
                    next
                })
            })
            .collect()
    })
}

/// Parameters of a hit-fraction run.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HitParams {
    pub n: usize,
    pub m: u32,
    /// Heights are restricted to `q_min < |q| ≤ q_max`.
    pub q_min: u64,
    pub q_max: u64,
    /// A sample is a hit when it has at least `k` solutions.
    pub k: u64,
    pub samples: u64,
    pub seed: u64,
    pub coprime: bool,
    /// Fractional bits per sampled coordinate.
    pub precision_bits: u32,
}

impl HitParams {
    pub fn new(
        n: usize,
        m: u32,
        q_max: u64,
        k: u64,
        samples: u64,
        seed: u64,
        coprime: bool,
    ) -> Self {
        HitParams {
            n,
            m,
            q_min: 0,
            q_max,
            k,
            samples,
            seed,
            coprime,
            precision_bits: DEFAULT_BITS,
        }
    }
}

struct Height {
    q: Vec<i64>,
    gcd: u64,
    psi: Threshold,
}

fn heights(spec: &PsiSpec, n: usize, q_min: u64, q_max: u64) -> Result<Vec<Height>> {
    let mut out = Vec::new();
    for q in OrthantVectors::new(n, q_max) {
        if q.sup_norm() <= q_min {
            continue;
        }
        let psi = spec.eval(&q)?.require_exact("hit_fraction")?.clone();
        if psi.is_positive() {
            out.push(Height {
                gcd: vec_gcd(&q)?,
                q: q.0,
                psi: Threshold::new(psi),
            });
        }
    }
    Ok(out)
}

/// Column `j` of a sampled `n × m` point, stored row-major.
fn column(point: &[u128], m: usize, j: usize) -> impl Iterator<Item = u128> + '_ {
    point.iter().skip(j).step_by(m).copied()
}

fn count_solutions(h: &Height, point: &[u128], m: usize, coprime: bool, limit: u64) -> u64 {
    let mut total = 1u64;
    for j in 0..m {
        let y = sampling::linear_form(&h.q, column(point, m, j));
        let c = if coprime {
            let g = u128::from(h.gcd);
            sampling::count_within(
                &y,
                None,
                &h.psi,
                |p| p.unsigned_abs().gcd(&g) == 1,
                u64::MAX,
            )
        } else {
            sampling::count_within(&y, None, &h.psi, |_| true, u64::MAX)
        };
        total = total.saturating_mul(c);
        if total == 0 {
            return 0;
        }
    }
    total.min(limit)
}

/// Fraction of uniform samples `x ∈ [0,1)^{nm}` with at least `k`
/// solutions of height in `(q_min, q_max]`.
pub fn hit_fraction(spec: &PsiSpec, params: &HitParams) -> Result<McReport> {
    let HitParams {
        n,
        m,
        q_min,
        q_max,
        k,
        samples,
        seed,
        coprime,
        precision_bits,
    } = *params;
    if n == 0 || m == 0 || k == 0 || q_max == 0 {
        return Err(Error::domain("n, m, K and Q must be positive"));
    }
    spec.validate()?;
    spec.check_dimension(n)?;
    let hs = heights(spec, n, q_min, q_max)?;
    let sampler = PointSampler::new(seed, n * m as usize, precision_bits)?;
    let hits = sampling::count_hits(samples, |i| {
        let point = sampler.point(i);
        let mut found = 0u64;
        for h in &hs {
            found += count_solutions(h, &point, m as usize, coprime, k - found);
            if found >= k {
                return true;
            }
        }
        false
    });
    Ok(McReport::new(
        samples,
        hits,
        seed,
        json!({
            "kind": "hit_fraction",
            "params": params,
            "psi": spec,
        }),
    ))
}

/// Exact membership of a sampled point in `A_{n,m}(q, ε)` (any mode).
pub fn sample_in_set(set: &ApproxSet<BigRational>, point: &[u128]) -> bool {
    let d = set.scale();
    let eps = Threshold::new(set.epsilon.clone());
    let m = set.m as usize;
    (0..m).all(|j| {
        let y = sampling::linear_form(set.q.components(), column(point, m, j));
        sampling::count_within(&y, None, &eps, |p| set.mode.admits(p, d), 1) > 0
    })
}

/// Monte Carlo measure of `∪ sets`, membership decided exactly.
pub fn empirical_union_measure(
    sets: &[ApproxSet<BigRational>],
    samples: u64,
    seed: u64,
) -> Result<McReport> {
    let first = sets
        .first()
        .ok_or_else(|| Error::domain("need at least one set"))?;
    let (n, m) = (first.n, first.m);
    if sets.iter().any(|s| s.n != n || s.m != m) {
        return Err(Error::Dimension("all sets must share (n, m)".into()));
    }
    let sampler = PointSampler::new(seed, n * m as usize, DEFAULT_BITS)?;
    let hits = sampling::count_hits(samples, |i| {
        let point = sampler.point(i);
        sets.iter().any(|s| sample_in_set(s, &point))
    });
    let described: Vec<_> = sets
        .iter()
        .map(|s| json!({ "q": s.q, "epsilon": crate::scalar::rational_json(&s.epsilon), "mode": s.mode }))
        .collect();
    Ok(McReport::new(
        samples,
        hits,
        seed,
        json!({ "kind": "union_measure", "n": n, "m": m, "sets": described }),
    ))
}

/// Monte Carlo measure of `∩ sets`, membership decided exactly.
pub fn empirical_intersection_measure(
    sets: &[ApproxSet<BigRational>],
    samples: u64,
    seed: u64,
) -> Result<McReport> {
    let first = sets
        .first()
        .ok_or_else(|| Error::domain("need at least one set"))?;
    let (n, m) = (first.n, first.m);
    if sets.iter().any(|s| s.n != n || s.m != m) {
        return Err(Error::Dimension("all sets must share (n, m)".into()));
    }
    let sampler = PointSampler::new(seed, n * m as usize, DEFAULT_BITS)?;
    let hits = sampling::count_hits(samples, |i| {
        let point = sampler.point(i);
        sets.iter().all(|s| sample_in_set(s, &point))
    });
    let q: Vec<_> = sets.iter().map(|s| &s.q).collect();
    Ok(McReport::new(
        samples,
        hits,
        seed,
        json!({ "kind": "intersection_measure", "n": n, "m": m, "q": q }),
    ))
}

/// Exact rational coordinates of a sampled point, as an `n × m` matrix.
pub fn sample_matrix(point: &[u128], n: usize, m: usize) -> Result<Matrix> {
    if point.len() != n * m {
        return Err(Error::Dimension("point length must be n·m".into()));
    }
    Ok(point
        .chunks(m)
        .map(|row| {
            row.iter()
                .map(|&c| Fixed::from_numerator(c).to_rational())
                .collect()
        })
        .collect())
}

/// A lifted solution `(t·p, t·q)` of the original inequality.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Lift {
    pub t: u64,
    pub p: IntVec,
    pub q: IntVec,
    #[serde(serialize_with = "crate::report::ser_rational")]
    pub residual: BigRational,
    #[serde(serialize_with = "crate::report::ser_rational")]
    pub psi: BigRational,
}

/// Given `|qx − p| < ψ̄(q)` (sup truncated at `t_max`), returns
/// `(t_q p, t_q q)` with `|t_q q x − t_q p| < ψ(t_q q)`.
pub fn lift_solution(
    p: &IntVec,
    q: &IntVec,
    spec: &PsiSpec,
    x: &Matrix,
    t_max: u64,
) -> Result<Lift> {
    let ys = linear_forms(q, x)?;
    if p.len() != ys.len() {
        return Err(Error::Dimension(format!(
            "p has {} components, x has {} columns",
            p.len(),
            ys.len()
        )));
    }
    let residual = ys
        .iter()
        .zip(p.components())
        .map(|(y, &pj)| (y - BigRational::from_integer(pj.into())).abs())
        .fold(BigRational::zero(), |a, b| if b > a { b } else { a });
    let bar = catlin_bar(spec, q, t_max)?;
    let bar_value = bar.value.require_exact("lift_solution")?;
    if residual >= *bar_value {
        return Err(Error::pre(
            "lift_solution",
            format!("residual {residual} is not below ψ̄(q) = {bar_value}"),
        ));
    }
    let t = bar
        .witness
        .ok_or_else(|| Error::NoWitness(format!("no t ≤ {t_max} provably attains ψ̄({q})")))?;
    let q_star = scaled(q, t)?;
    let p_star = scaled(p, t)?;
    let residual_star = &residual * BigRational::from_integer(t.into());
    let psi_star = spec.eval_exact(&q_star)?;
    if residual_star >= psi_star {
        return Err(Error::NoWitness(format!(
            "witness t = {t} does not satisfy the lifted inequality"
        )));
    }
    Ok(Lift {
        t,
        p: p_star,
        q: q_star,
        residual: residual_star,
        psi: psi_star,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CounterexampleReport {
    #[serde(rename = "N")]
    pub big_n: u64,
    #[serde(serialize_with = "crate::report::ser_rational")]
    pub eta: BigRational,
    /// `Σ_{q | N} 2ψ(q)`, summed over the divisors.
    #[serde(serialize_with = "crate::report::ser_rational")]
    pub sum: BigRational,
    /// `2η·σ(N)/N`.
    #[serde(serialize_with = "crate::report::ser_rational")]
    pub sum_closed_form: BigRational,
    /// `Leb(∪_{q | N} A_{1,1}(q, ψ(q)))`, exact.
    #[serde(serialize_with = "crate::report::ser_rational")]
    pub union_exact: BigRational,
    pub ratio: f64,
    pub union_mc: McReport,
}

/// `ψ(q) = ηq/N` on the divisors of `N`: every arc has radius `η/N` and sits
/// at a multiple of `1/N`, so the sets pile up on each other.
pub fn counterexample_demo(
    big_n: u64,
    eta: &BigRational,
    samples: u64,
    seed: u64,
) -> Result<CounterexampleReport> {
    if big_n < 2 {
        return Err(Error::domain("N must be at least 2"));
    }
    let spec = PsiSpec::DsCounterexample {
        big_n,
        eta: eta.clone(),
    };
    spec.validate()?;
    let divs = divisors(big_n)?;
    let mut sum = BigRational::zero();
    let mut centers = BTreeSet::new();
    for &q in &divs {
        sum += spec.eval_exact(&IntVec(vec![q as i64]))? * BigRational::from_integer(2.into());
        // p/q = p·(N/q)/N
        let step = big_n / q;
        centers.extend((0..q).map(|p| p * step));
    }
    let n_big = BigRational::from_integer(big_n.into());
    let centers: Vec<BigRational> = centers
        .into_iter()
        .map(|k| BigRational::from_integer(k.into()) / &n_big)
        .collect();
    let radius = eta / &n_big;
    let union = ArcUnion::from_balls(centers.iter(), &radius).measure();
    let closed = eta
        * BigRational::from_integer(2.into())
        * BigRational::from_integer(divisor_sum(big_n)?.into())
        / &n_big;

    let heights: Vec<Height> = divs
        .iter()
        .map(|&q| {
            Ok(Height {
                q: vec![q as i64],
                gcd: q,
                psi: Threshold::new(spec.eval_exact(&IntVec(vec![q as i64]))?),
            })
        })
        .collect::<Result<_>>()?;
    let sampler = PointSampler::new(seed, 1, DEFAULT_BITS)?;
    let hits = sampling::count_hits(samples, |i| {
        let point = sampler.point(i);
        heights
            .iter()
            .any(|h| count_solutions(h, &point, 1, false, 1) > 0)
    });
    let union_mc = McReport::new(
        samples,
        hits,
        seed,
        json!({ "kind": "counterexample_union", "N": big_n, "eta": crate::scalar::rational_json(eta) }),
    );
    let ratio = if union.is_zero() {
        f64::INFINITY
    } else {
        (&sum / &union).to_f64().unwrap_or(f64::INFINITY)
    };
    Ok(CounterexampleReport {
        big_n,
        eta: eta.clone(),
        sum,
        sum_closed_form: closed,
        union_exact: union,
        ratio,
        union_mc,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::IntVec;
    use crate::scalar::rat;
    use crate::torus::NumeratorMode;

    fn constant(v: BigRational) -> PsiSpec {
        PsiSpec::RadialTable {
            values: (1..=50).map(|h| (h, v.clone())).collect(),
        }
    }

    #[test]
    fn enumeration_examples() {
        let x = vec![vec![rat(1, 2)]];
        let sols = enumerate_solutions(&x, &constant(rat(1, 4)), 2, false).unwrap();
        assert!(sols.contains(&Solution {
            q: IntVec(vec![2]),
            p: IntVec(vec![1]),
            residual: rat(0, 1),
            coprime_ok: true,
        }));
        assert!(enumerate_solutions(&x, &PsiSpec::zero(), 5, false)
            .unwrap()
            .is_empty());
    }

    #[test]
    fn enumeration_matches_naive_loop() {
        let x = vec![vec![rat(1, 3)]];
        let spec = constant(rat(1, 10));
        let fast = enumerate_solutions(&x, &spec, 3, false).unwrap();
        let mut naive = Vec::new();
        for q in 1..=3i64 {
            for p in -4..=4i64 {
                let r = (rat(q, 3) - rat(p, 1)).abs();
                if r < rat(1, 10) {
                    naive.push((q, p));
                }
            }
        }
        let got: Vec<(i64, i64)> = fast.iter().map(|s| (s.q.0[0], s.p.0[0])).collect();
        assert_eq!(got, naive);
        assert_eq!(got, vec![(3, 1)]);
    }

    #[test]
    fn wide_psi_keeps_every_candidate() {
        let x = vec![vec![rat(1, 5)]];
        let sols = enumerate_solutions(&x, &constant(rat(3, 2)), 1, false).unwrap();
        let ps: Vec<i64> = sols.iter().map(|s| s.p.0[0]).collect();
        assert_eq!(ps, vec![-1, 0, 1]);
        let coprime = enumerate_solutions(&x, &constant(rat(3, 2)), 1, true).unwrap();
        assert_eq!(coprime.len(), 3, "gcd(p, 1) = 1 for every p");
    }

    #[test]
    fn hit_fraction_extremes() {
        let full = hit_fraction(
            &constant(rat(1, 1)),
            &HitParams::new(1, 1, 5, 3, 200, 1, false),
        )
        .unwrap();
        assert_eq!(full.fraction, 1.0);
        let none =
            hit_fraction(&PsiSpec::zero(), &HitParams::new(2, 2, 5, 1, 200, 1, true)).unwrap();
        assert_eq!(none.hits, 0);
    }

    #[test]
    fn union_measure_examples() {
        let set = ApproxSet::new(1, 1, IntVec(vec![5]), rat(1, 4), NumeratorMode::Coprime).unwrap();
        let r = empirical_union_measure(&[set], 40_000, 9).unwrap();
        assert!(r.agrees_with(0.4, 4.0));
        let full = ApproxSet::new(1, 1, IntVec(vec![2]), rat(1, 1), NumeratorMode::Plain).unwrap();
        assert_eq!(
            empirical_union_measure(&[full], 500, 2).unwrap().fraction,
            1.0
        );
    }

    #[test]
    fn lift_examples() {
        let table = PsiSpec::RadialTable {
            values: [(2, rat(1, 10)), (4, rat(1, 1))].into_iter().collect(),
        };
        // 2·x − 1 = 1/4 at x = 5/8
        let x = vec![vec![rat(5, 8)]];
        let lift = lift_solution(&IntVec(vec![1]), &IntVec(vec![2]), &table, &x, 4).unwrap();
        assert_eq!(
            (lift.t, lift.q.clone(), lift.p.clone()),
            (2, IntVec(vec![4]), IntVec(vec![2]))
        );
        assert_eq!(lift.residual, rat(1, 2));
        assert_eq!(lift.psi, rat(1, 1));
        let power = PsiSpec::power_law(rat(1, 1), rat(1, 1));
        let x = vec![vec![rat(1, 7)]];
        let id = lift_solution(&IntVec(vec![1]), &IntVec(vec![7]), &power, &x, 10).unwrap();
        assert_eq!(id.t, 1);
        let far = lift_solution(&IntVec(vec![1]), &IntVec(vec![2]), &table, &x, 4);
        assert!(matches!(far, Err(Error::Precondition { .. })));
    }

    #[test]
    fn counterexample_small() {
        let r = counterexample_demo(6, &rat(1, 10), 20_000, 4).unwrap();
        assert_eq!(r.sum, rat(2, 5));
        assert_eq!(r.sum, r.sum_closed_form);
        assert_eq!(r.union_exact, rat(1, 5));
        assert!(r.union_mc.agrees_with(0.2, 4.0));
    }
}
