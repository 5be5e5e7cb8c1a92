//! Partial sums of the divergence criteria: Duffin–Schaeffer, its factored
//! form, `Ψ(d)`, Catlin, Khintchine, Khintchine–Groshev,
//! Beresnevich–Velani and the Hausdorff analogues for `g(r) = r^s`.
//!
//! Sums are organised in blocks (sup-norm shells, or the scale `d` for the
//! factored sum). Blocks are evaluated in parallel and then accumulated
//! sequentially, so floating enclosures are independent of thread count.

use num_rational::BigRational;
use num_traits::Signed;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value as Json};

use crate::arith::{orthant_shell, phi_m, primitive_vectors, totient, vec_gcd, IntVec, PhiMode};
use crate::error::{Error, Result};
use crate::psi::{catlin_bar, scaled, PsiSpec};
use crate::value::Value;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum VerdictHint {
    DivergingTrend,
    ConvergingTrend,
    Inconclusive,
}

pub const VERDICT_METHOD: &str =
    "heuristic: least-squares slope of partial sums against log cutoff, late half versus early half";

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Checkpoint {
    pub cutoff: u64,
    pub partial_sum: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SeriesReport {
    pub series: &'static str,
    pub cutoffs: Json,
    pub partial_sum: Value,
    pub term_count: u64,
    /// Sum over the blocks in `(B/2, B]`, `B` the last block index.
    pub last_block_sum: Value,
    /// Partial sums at powers of two and at the final cutoff.
    pub checkpoints: Vec<Checkpoint>,
    pub verdict_hint: VerdictHint,
    pub verdict_method: &'static str,
}

/// Sums `block(b)` over `b = 1..=last`, each returning `(sum, term count)`.
fn block_series(
    series: &'static str,
    cutoffs: Json,
    last: u64,
    block: impl Fn(u64) -> Result<(Value, u64)> + Sync,
) -> Result<SeriesReport> {
    if last == 0 {
        return Err(Error::domain("cutoff must be at least 1"));
    }
    let blocks: Vec<(Value, u64)> = (1..=last)
        .into_par_iter()
        .map(&block)
        .collect::<Result<Vec<_>>>()?;
    let mut total = Value::zero();
    let mut tail = Value::zero();
    let mut count = 0u64;
    let mut checkpoints = Vec::new();
    for (b, (sum, n)) in (1..=last).zip(&blocks) {
        total = total.add(sum);
        count += n;
        if 2 * b > last {
            tail = tail.add(sum);
        }
        if b.is_power_of_two() || b == last {
            checkpoints.push(Checkpoint {
                cutoff: b,
                partial_sum: total.approx(),
            });
        }
    }
    let verdict_hint = verdict(&checkpoints);
    Ok(SeriesReport {
        series,
        cutoffs,
        partial_sum: total,
        term_count: count,
        last_block_sum: tail,
        checkpoints,
        verdict_hint,
        verdict_method: VERDICT_METHOD,
    })
}

fn slope(points: &[Checkpoint]) -> f64 {
    let n = points.len() as f64;
    let xs: Vec<f64> = points.iter().map(|c| (c.cutoff as f64).ln()).collect();
    let mx = xs.iter().sum::<f64>() / n;
    let my = points.iter().map(|c| c.partial_sum).sum::<f64>() / n;
    let sxy: f64 = xs
        .iter()
        .zip(points)
        .map(|(x, c)| (x - mx) * (c.partial_sum - my))
        .sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

fn verdict(checkpoints: &[Checkpoint]) -> VerdictHint {
    let last = checkpoints.last().map_or(0.0, |c| c.partial_sum);
    if last == 0.0 {
        return VerdictHint::ConvergingTrend;
    }
    if checkpoints.len() < 6 {
        return VerdictHint::Inconclusive;
    }
    let half = checkpoints.len() / 2;
    let (early, late) = (slope(&checkpoints[..half]), slope(&checkpoints[half..]));
    if early <= 0.0 || late <= 1e-3 * last {
        VerdictHint::ConvergingTrend
    } else if late >= 0.5 * early {
        VerdictHint::DivergingTrend
    } else if late < 0.1 * early {
        VerdictHint::ConvergingTrend
    } else {
        VerdictHint::Inconclusive
    }
}

fn gcd_density(q: &IntVec) -> Result<BigRational> {
    let g = vec_gcd(q)?;
    Ok(BigRational::new(totient(g)?.into(), g.into()))
}

fn check(spec: &PsiSpec, n: usize, m: u32) -> Result<()> {
    if n == 0 || m == 0 {
        return Err(Error::domain("n and m must be positive"));
    }
    spec.validate()?;
    spec.check_dimension(n)
}

/// Sum of `term(q)` over the sup-norm shell `h` of the orthant.
fn shell_sum(
    n: usize,
    h: u64,
    term: &(impl Fn(&IntVec) -> Result<Value> + Sync),
) -> Result<(Value, u64)> {
    let mut sum = Value::zero();
    let mut count = 0;
    for q in orthant_shell(n, h) {
        sum = sum.add(&term(&q)?);
        count += 1;
    }
    Ok((sum, count))
}

/// `Σ_{0<|q|≤Q} (φ(g)ψ(q)/g)^m`, `g = gcd(q)`.
pub fn ds_sum(spec: &PsiSpec, n: usize, m: u32, q_max: u64) -> Result<SeriesReport> {
    check(spec, n, m)?;
    let term = |q: &IntVec| Ok(spec.eval(q)?.mul_rational(&gcd_density(q)?).powu(m));
    block_series("ds", json!({ "n": n, "m": m, "Q": q_max }), q_max, |h| {
        shell_sum(n, h, &term)
    })
}

/// `Σ_{q′ ∈ Pⁿ, |q′|≤H} Σ_{d≤D} (φ(d)ψ(dq′)/d)^m`, blocked by `d`.
pub fn ds_sum_factored(
    spec: &PsiSpec,
    n: usize,
    m: u32,
    h_prim: u64,
    d_max: u64,
) -> Result<SeriesReport> {
    check(spec, n, m)?;
    if h_prim == 0 {
        return Err(Error::domain("H must be at least 1"));
    }
    let prims: Vec<IntVec> = primitive_vectors(n, h_prim).collect();
    block_series(
        "ds_factored",
        json!({ "n": n, "m": m, "H": h_prim, "D": d_max }),
        d_max,
        |d| {
            let density = BigRational::new(totient(d)?.into(), d.into());
            let mut sum = Value::zero();
            for p in &prims {
                sum = sum.add(&spec.eval(&scaled(p, d)?)?.mul_rational(&density).powu(m));
            }
            Ok((sum, prims.len() as u64))
        },
    )
}

/// Upper bound on the omitted part of a truncated sum.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TailBound {
    Bounded { value: f64 },
    Divergent,
    Unavailable,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CapitalPsi {
    pub d: u64,
    #[serde(rename = "H")]
    pub h_prim: u64,
    /// `Σ_{q′ ∈ Pⁿ, |q′|≤H} ψ(dq′)^m`.
    pub sum_of_powers: Value,
    /// Its `m`-th root.
    pub value: Value,
    pub term_count: u64,
    /// Bound on the omitted `Σ_{|q′|>H} ψ(dq′)^m`.
    pub tail_bound: TailBound,
}

/// `Ψ(d) = (Σ_{q′ ∈ Pⁿ} ψ(dq′)^m)^{1/m}`, truncated at `|q′| ≤ H`.
pub fn capital_psi(spec: &PsiSpec, n: usize, m: u32, d: u64, h_prim: u64) -> Result<CapitalPsi> {
    check(spec, n, m)?;
    if d == 0 || h_prim == 0 {
        return Err(Error::domain("d and H must be at least 1"));
    }
    let mut sum = Value::zero();
    let mut count = 0;
    for p in primitive_vectors(n, h_prim) {
        sum = sum.add(&spec.eval(&scaled(&p, d)?)?.powu(m));
        count += 1;
    }
    let value = sum.pow_rational(&BigRational::new(1.into(), m.into()))?;
    let tail_bound = if n == 1 {
        // P¹ = {1}: nothing is omitted
        TailBound::Bounded { value: 0.0 }
    } else {
        power_law_tail(spec, n, m, d, h_prim)
    };
    Ok(CapitalPsi {
        d,
        h_prim,
        sum_of_powers: sum,
        value,
        term_count: count,
        tail_bound,
    })
}

/// For `ψ = c|q|^{−τ}`: the shell `h` holds at most `n(h+1)^{n−1} ≤ n2^{n−1}h^{n−1}`
/// points, so the tail is at most `c^m d^{−τm} n 2^{n−1} H^{n−τm}/(τm − n)`.
fn power_law_tail(spec: &PsiSpec, n: usize, m: u32, d: u64, h: u64) -> TailBound {
    let PsiSpec::PowerLaw { c, tau } = spec else {
        return match spec.support_bound() {
            Some(s) if s <= d.saturating_mul(h) => TailBound::Bounded { value: 0.0 },
            _ => TailBound::Unavailable,
        };
    };
    let exponent = tau * BigRational::from_integer(m.into()) - BigRational::from_integer(n.into());
    if !exponent.is_positive() {
        return TailBound::Divergent;
    }
    let (Some(cf), Some(tf), Some(ef)) = (
        num_traits::ToPrimitive::to_f64(c),
        num_traits::ToPrimitive::to_f64(tau),
        num_traits::ToPrimitive::to_f64(&exponent),
    ) else {
        return TailBound::Unavailable;
    };
    let mf = f64::from(m);
    let bound = cf.powf(mf)
        * (d as f64).powf(-tf * mf)
        * n as f64
        * 2f64.powi(n as i32 - 1)
        * (h as f64).powf(-ef)
        / ef;
    // generous outward rounding for the handful of float operations above
    TailBound::Bounded {
        value: (bound * (1.0 + 1e-12)).next_up(),
    }
}

/// `Σ_{0<|q|≤Q} Φ_m(q)·(ψ̄(q)/|q|)^m`.
pub fn catlin_sum(
    spec: &PsiSpec,
    n: usize,
    m: u32,
    q_max: u64,
    t_max: u64,
    mode: PhiMode,
) -> Result<SeriesReport> {
    check(spec, n, m)?;
    let term = |q: &IntVec| {
        let bar = catlin_bar(spec, q, t_max)?.value;
        let weight = BigRational::from_integer(phi_m(q, m, mode)?.into());
        let inv = BigRational::new(1.into(), q.sup_norm().into());
        Ok(bar.mul_rational(&inv).powu(m).mul_rational(&weight))
    };
    block_series(
        "catlin",
        json!({ "n": n, "m": m, "Q": q_max, "t_max": t_max, "phi_mode": mode }),
        q_max,
        |h| shell_sum(n, h, &term),
    )
}

fn radial(spec: &PsiSpec, h: u64) -> Result<Value> {
    spec.eval(&IntVec(vec![h as i64]))
}

/// `Σ_{q≤Q} ψ(q)^m`.
pub fn khintchine_sum(spec: &PsiSpec, m: u32, q_max: u64) -> Result<SeriesReport> {
    check(spec, 1, m)?;
    block_series("khintchine", json!({ "m": m, "Q": q_max }), q_max, |h| {
        Ok((radial(spec, h)?.powu(m), 1))
    })
}

/// `Σ_{q≤Q} q^{n−1} ψ(q)^m` for radial `ψ`.
pub fn kg_sum(spec: &PsiSpec, n: usize, m: u32, q_max: u64) -> Result<SeriesReport> {
    if n == 0 {
        return Err(Error::domain("n must be positive"));
    }
    check(spec, 1, m)?;
    block_series(
        "khintchine_groshev",
        json!({ "n": n, "m": m, "Q": q_max }),
        q_max,
        |h| {
            let weight = num_traits::pow(BigRational::from_integer(h.into()), n - 1);
            Ok((radial(spec, h)?.powu(m).mul_rational(&weight), 1))
        },
    )
}

/// `Σ_{0<|q|≤Q} ψ(q)^m` over the orthant.
pub fn bv_sum(spec: &PsiSpec, n: usize, m: u32, q_max: u64) -> Result<SeriesReport> {
    check(spec, n, m)?;
    let term = |q: &IntVec| Ok(spec.eval(q)?.powu(m));
    block_series(
        "beresnevich_velani",
        json!({ "n": n, "m": m, "Q": q_max }),
        q_max,
        |h| shell_sum(n, h, &term),
    )
}

fn check_s(s: &BigRational) -> Result<()> {
    if !s.is_positive() {
        return Err(Error::domain(
            "the exponent s of g(r) = r^s must be positive",
        ));
    }
    Ok(())
}

/// `Σ_{0<|q|≤Q} (φ(g)|q|/g)^m · (ψ(q)/|q|)^s`.
pub fn hausdorff_ds_sum(
    spec: &PsiSpec,
    n: usize,
    m: u32,
    s: &BigRational,
    q_max: u64,
) -> Result<SeriesReport> {
    check(spec, n, m)?;
    check_s(s)?;
    let term = |q: &IntVec| {
        let h = q.sup_norm();
        let weight = num_traits::pow(
            gcd_density(q)? * BigRational::from_integer(h.into()),
            m as usize,
        );
        let g = spec
            .eval(q)?
            .mul_rational(&BigRational::new(1.into(), h.into()));
        Ok(power_s(&g, s)?.mul_rational(&weight))
    };
    block_series(
        "hausdorff_ds",
        json!({ "n": n, "m": m, "s": crate::report::rational_text::to_text(s), "Q": q_max }),
        q_max,
        |h| shell_sum(n, h, &term),
    )
}

/// `Σ_{0<|q|≤Q} Φ_m(q) · (ψ̄(q)/|q|)^s`; `r ↦ r^s` is increasing, so the
/// supremum commutes with `g`.
pub fn hausdorff_catlin_sum(
    spec: &PsiSpec,
    n: usize,
    m: u32,
    s: &BigRational,
    q_max: u64,
    t_max: u64,
    mode: PhiMode,
) -> Result<SeriesReport> {
    check(spec, n, m)?;
    check_s(s)?;
    let term = |q: &IntVec| {
        let bar = catlin_bar(spec, q, t_max)?.value;
        let weight = BigRational::from_integer(phi_m(q, m, mode)?.into());
        let g = bar.mul_rational(&BigRational::new(1.into(), q.sup_norm().into()));
        Ok(power_s(&g, s)?.mul_rational(&weight))
    };
    block_series(
        "hausdorff_catlin",
        json!({
            "n": n, "m": m, "s": crate::report::rational_text::to_text(s),
            "Q": q_max, "t_max": t_max, "phi_mode": mode,
        }),
        q_max,
        |h| shell_sum(n, h, &term),
    )
}

fn power_s(v: &Value, s: &BigRational) -> Result<Value> {
    if v.is_zero() {
        return Ok(Value::zero());
    }
    v.pow_rational(s)
}
