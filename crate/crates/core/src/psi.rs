//! Approximating functions `ψ` on the nonnegative orthant, their exact
//! evaluation, the Catlin transform `ψ̄(q) = sup_{t≥1} ψ(tq)/t` and the
//! threshold split at `d/(2φ(d))`.

use std::cmp::Ordering;
use std::collections::BTreeMap;

use num_rational::BigRational;
use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::arith::{totient, vec_gcd, IntVec};
use crate::error::{Error, Result};
use crate::report::rational_text;
use crate::value::Value;

/// Which side of the threshold `d/(2φ(d))` a [`PsiSpec::ThresholdPart`] keeps.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Part {
    Small,
    Large,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum PsiSpec {
    /// `c · |q|^{−τ}`.
    PowerLaw {
        #[serde(with = "rational_text")]
        c: BigRational,
        #[serde(with = "rational_text")]
        tau: BigRational,
    },
    /// `ψ(q) = values[|q|]`, zero off the table.
    RadialTable {
        #[serde(with = "radial_entries")]
        values: BTreeMap<u64, BigRational>,
    },
    /// `ψ(q) = values[q]` on `Z^n_{≥0} \ {0}`, zero off the table.
    ExplicitTable {
        n: usize,
        #[serde(with = "explicit_entries")]
        values: BTreeMap<IntVec, BigRational>,
    },
    /// `ψ(q) = η·q/N` for `q | N`, else 0 (n = 1).
    DsCounterexample {
        #[serde(rename = "N")]
        big_n: u64,
        #[serde(with = "rational_text")]
        eta: BigRational,
    },
    /// `ψ̄` truncated at `t ≤ t_max`.
    CatlinTransform {
        inner: Box<PsiSpec>,
        t_max: u64,
    },
    ThresholdPart {
        inner: Box<PsiSpec>,
        part: Part,
    },
}

impl PsiSpec {
    /// `ψ ≡ 0`.
    pub fn zero() -> Self {
        PsiSpec::RadialTable {
            values: BTreeMap::new(),
        }
    }

    pub fn power_law(c: BigRational, tau: BigRational) -> Self {
        PsiSpec::PowerLaw { c, tau }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            PsiSpec::PowerLaw { c, .. } => {
                if !c.is_positive() {
                    return Err(Error::Config("power_law needs c > 0".into()));
                }
            }
            PsiSpec::RadialTable { values } => {
                if values.contains_key(&0) {
                    return Err(Error::Config("radial_table keys must be positive".into()));
                }
                check_nonnegative(values.values())?;
            }
            PsiSpec::ExplicitTable { n, values } => {
                if *n == 0 {
                    return Err(Error::Config("explicit_table needs n ≥ 1".into()));
                }
                for q in values.keys() {
                    if q.len() != *n || q.is_zero() || !q.in_orthant() {
                        return Err(Error::Config(format!(
                            "explicit_table key {q} must be a nonzero point of the orthant in dimension {n}"
                        )));
                    }
                }
                check_nonnegative(values.values())?;
            }
            PsiSpec::DsCounterexample { big_n, eta } => {
                if *big_n == 0 || !eta.is_positive() {
                    return Err(Error::Config(
                        "ds_counterexample needs N ≥ 1 and η > 0".into(),
                    ));
                }
            }
            PsiSpec::CatlinTransform { inner, t_max } => {
                if *t_max == 0 {
                    return Err(Error::Config("catlin_transform needs t_max ≥ 1".into()));
                }
                inner.validate()?;
            }
            PsiSpec::ThresholdPart { inner, .. } => inner.validate()?,
        }
        if let Some(n) = self.fixed_dimension() {
            self.check_dimension(n)?;
        }
        Ok(())
    }

    /// The dimension `n` this spec is tied to, if any.
    pub fn fixed_dimension(&self) -> Option<usize> {
        match self {
            PsiSpec::ExplicitTable { n, .. } => Some(*n),
            PsiSpec::DsCounterexample { .. } => Some(1),
            PsiSpec::CatlinTransform { inner, .. } | PsiSpec::ThresholdPart { inner, .. } => {
                inner.fixed_dimension()
            }
            _ => None,
        }
    }

    pub fn check_dimension(&self, n: usize) -> Result<()> {
        match self.fixed_dimension() {
            Some(k) if k != n => Err(Error::Dimension(format!(
                "ψ is defined on Z^{k}, not Z^{n}"
            ))),
            _ => match self {
                PsiSpec::CatlinTransform { inner, .. } | PsiSpec::ThresholdPart { inner, .. } => {
                    inner.check_dimension(n)
                }
                _ => Ok(()),
            },
        }
    }

    /// A sup-norm beyond which `ψ` vanishes, when one is known.
    pub fn support_bound(&self) -> Option<u64> {
        match self {
            PsiSpec::PowerLaw { .. } => None,
            PsiSpec::RadialTable { values } => {
                Some(values.keys().next_back().copied().unwrap_or(0))
            }
            PsiSpec::ExplicitTable { values, .. } => {
                Some(values.keys().map(IntVec::sup_norm).max().unwrap_or(0))
            }
            PsiSpec::DsCounterexample { big_n, .. } => Some(*big_n),
            PsiSpec::CatlinTransform { .. } => None,
            PsiSpec::ThresholdPart { inner, .. } => inner.support_bound(),
        }
    }

    pub fn eval(&self, q: &IntVec) -> Result<Value> {
        if q.is_zero() || !q.in_orthant() {
            return Err(Error::domain(format!(
                "ψ is defined on the nonzero orthant, got {q}"
            )));
        }
        match self {
            PsiSpec::PowerLaw { c, tau } => Value::power_law(c, q.sup_norm(), tau),
            PsiSpec::RadialTable { values } => Ok(lookup(values.get(&q.sup_norm()))),
            PsiSpec::ExplicitTable { n, values } => {
                if q.len() != *n {
                    return Err(Error::Dimension(format!("ψ is defined on Z^{n}, got {q}")));
                }
                Ok(lookup(values.get(q)))
            }
            PsiSpec::DsCounterexample { big_n, eta } => {
                if q.len() != 1 {
                    return Err(Error::Dimension(format!("ψ is defined on Z^1, got {q}")));
                }
                let h = q.sup_norm();
                Ok(Value::Exact(if big_n % h == 0 {
                    eta * BigRational::new(h.into(), (*big_n).into())
                } else {
                    BigRational::zero()
                }))
            }
            PsiSpec::CatlinTransform { inner, t_max } => Ok(catlin_bar(inner, q, *t_max)?.value),
            PsiSpec::ThresholdPart { inner, part } => {
                let v = inner.eval(q)?;
                let d = vec_gcd(q)?;
                let bound = small_threshold(d)?;
                let small = match v.cmp_rational(&bound) {
                    Some(o) => o != Ordering::Greater,
                    None => {
                        return Err(Error::Undecidable(format!(
                            "ψ({q}) is too close to the threshold {bound} to split"
                        )))
                    }
                };
                Ok(if small == (*part == Part::Small) {
                    v
                } else {
                    Value::zero()
                })
            }
        }
    }

    /// Exact value, failing for irrational power laws.
    pub fn eval_exact(&self, q: &IntVec) -> Result<BigRational> {
        Ok(self.eval(q)?.require_exact("eval_exact")?.clone())
    }
}

fn lookup(v: Option<&BigRational>) -> Value {
    Value::Exact(v.cloned().unwrap_or_else(BigRational::zero))
}

fn check_nonnegative<'a>(values: impl Iterator<Item = &'a BigRational>) -> Result<()> {
    for v in values {
        if v.is_negative() {
            return Err(Error::Config(format!("table value {v} is negative")));
        }
    }
    Ok(())
}

/// `d/(2φ(d))`.
pub fn small_threshold(d: u64) -> Result<BigRational> {
    Ok(BigRational::new(d.into(), (2 * totient(d)?).into()))
}

/// `ψ = ψ₁ + ψ₂` with `ψ₁` the values at most `d/(2φ(d))`, `d = gcd(q)`.
pub fn threshold_split(spec: &PsiSpec) -> (PsiSpec, PsiSpec) {
    let wrap = |part| PsiSpec::ThresholdPart {
        inner: Box::new(spec.clone()),
        part,
    };
    (wrap(Part::Small), wrap(Part::Large))
}

/// `ψ̄(q)` over integer `1 ≤ t ≤ t_max`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CatlinBar {
    pub value: Value,
    /// Smallest `t` attaining the maximum; absent when enclosures cannot
    /// separate the candidates.
    pub witness: Option<u64>,
    /// The truncated maximum is provably the untruncated supremum.
    pub certified: bool,
}

pub fn catlin_bar(spec: &PsiSpec, q: &IntVec, t_max: u64) -> Result<CatlinBar> {
    if t_max == 0 {
        return Err(Error::domain("t_max must be at least 1"));
    }
    if let PsiSpec::PowerLaw { tau, .. } = spec {
        // ψ(tq)/t = ψ(q)·t^{−1−τ} is nonincreasing in t when τ ≥ −1
        if *tau >= -BigRational::from_integer(1.into()) {
            return Ok(CatlinBar {
                value: spec.eval(q)?,
                witness: Some(1),
                certified: true,
            });
        }
    }
    let mut best = spec.eval(q)?;
    let mut witness = Some(1);
    for t in 2..=t_max {
        let tq = scaled(q, t)?;
        let v = spec
            .eval(&tq)?
            .mul_rational(&BigRational::new(1.into(), t.into()));
        match v.partial_cmp_value(&best) {
            Some(Ordering::Greater) => {
                best = v;
                witness = Some(t);
            }
            Some(_) => {}
            None => {
                best = best.max(&v);
                witness = None;
            }
        }
    }
    let certified = spec
        .support_bound()
        .is_some_and(|s| u128::from(t_max) * u128::from(q.sup_norm()) >= u128::from(s));
    Ok(CatlinBar {
        value: best,
        witness,
        certified,
    })
}

pub(crate) fn scaled(q: &IntVec, t: u64) -> Result<IntVec> {
    let t = i64::try_from(t).map_err(|_| Error::domain("multiplier too large"))?;
    q.components()
        .iter()
        .map(|&c| {
            c.checked_mul(t)
                .ok_or_else(|| Error::domain("t·q overflows"))
        })
        .collect::<Result<Vec<_>>>()
        .map(IntVec)
}

#[derive(Serialize, Deserialize)]
struct RadialEntry {
    h: u64,
    #[serde(with = "rational_text")]
    value: BigRational,
}

#[derive(Serialize, Deserialize)]
struct ExplicitEntry {
    q: IntVec,
    #[serde(with = "rational_text")]
    value: BigRational,
}

mod radial_entries {
    use super::*;
    use serde::{Deserializer, Serializer};

    pub fn serialize<S: Serializer>(
        m: &BTreeMap<u64, BigRational>,
        s: S,
    ) -> std::result::Result<S::Ok, S::Error> {
        let v: Vec<RadialEntry> = m
            .iter()
            .map(|(&h, value)| RadialEntry {
                h,
                value: value.clone(),
            })
            .collect();
        v.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(
        d: D,
    ) -> std::result::Result<BTreeMap<u64, BigRational>, D::Error> {
        let v: Vec<RadialEntry> = Vec::deserialize(d)?;
        let mut out = BTreeMap::new();
        for e in v {
            if out.insert(e.h, e.value).is_some() {
                return Err(serde::de::Error::custom(format!(
                    "duplicate table key {}",
                    e.h
                )));
            }
        }
        Ok(out)
    }
}

mod explicit_entries {
    use super::*;
    use serde::{Deserializer, Serializer};

    pub fn serialize<S: Serializer>(
        m: &BTreeMap<IntVec, BigRational>,
        s: S,
    ) -> std::result::Result<S::Ok, S::Error> {
        let v: Vec<ExplicitEntry> = m
            .iter()
            .map(|(q, value)| ExplicitEntry {
                q: q.clone(),
                value: value.clone(),
            })
            .collect();
        v.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(
        d: D,
    ) -> std::result::Result<BTreeMap<IntVec, BigRational>, D::Error> {
        let v: Vec<ExplicitEntry> = Vec::deserialize(d)?;
        let mut out = BTreeMap::new();
        for e in v {
            let key = e.q.to_string();
            if out.insert(e.q, e.value).is_some() {
                return Err(serde::de::Error::custom(format!(
                    "duplicate table key {key}"
                )));
            }
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::rat;

    fn v(c: &[i64]) -> IntVec {
        IntVec(c.to_vec())
    }

    fn radial(entries: &[(u64, BigRational)]) -> PsiSpec {
        PsiSpec::RadialTable {
            values: entries.iter().cloned().collect(),
        }
    }

    #[test]
    fn eval_examples() {
        let p = PsiSpec::power_law(rat(1, 1), rat(2, 1));
        assert_eq!(p.eval_exact(&v(&[3, 4])).unwrap(), rat(1, 16));
        let ds = PsiSpec::DsCounterexample {
            big_n: 6,
            eta: rat(1, 10),
        };
        assert_eq!(ds.eval_exact(&v(&[3])).unwrap(), rat(1, 20));
        assert_eq!(ds.eval_exact(&v(&[4])).unwrap(), rat(0, 1));
        let (small, large) = threshold_split(&radial(&[(4, rat(10, 1))]));
        assert_eq!(small.eval_exact(&v(&[4])).unwrap(), rat(0, 1));
        assert_eq!(large.eval_exact(&v(&[4])).unwrap(), rat(10, 1));
    }

    #[test]
    fn eval_rejects_bad_arguments() {
        let p = PsiSpec::power_law(rat(1, 1), rat(1, 1));
        assert!(matches!(p.eval(&v(&[0, 0])), Err(Error::Domain(_))));
        assert!(matches!(p.eval(&v(&[-1, 2])), Err(Error::Domain(_))));
        let ds = PsiSpec::DsCounterexample {
            big_n: 6,
            eta: rat(1, 10),
        };
        assert!(matches!(ds.eval(&v(&[1, 1])), Err(Error::Dimension(_))));
    }

    #[test]
    fn catlin_examples() {
        let p = PsiSpec::power_law(rat(1, 1), rat(2, 1));
        let bar = catlin_bar(&p, &v(&[3]), 50).unwrap();
        assert_eq!(bar.value, p.eval(&v(&[3])).unwrap());
        assert!(bar.certified);
        let table = radial(&[(2, rat(1, 10)), (4, rat(1, 1))]);
        let bar = catlin_bar(&table, &v(&[2]), 2).unwrap();
        assert_eq!(bar.value, Value::Exact(rat(1, 2)));
        assert_eq!(bar.witness, Some(2));
        assert!(bar.certified);
        let bar = catlin_bar(&table, &v(&[2]), 1).unwrap();
        assert_eq!(bar.value, Value::Exact(rat(1, 10)));
        assert!(!bar.certified);
    }

    #[test]
    fn growing_power_law_is_truncated() {
        let p = PsiSpec::power_law(rat(1, 1), rat(-2, 1));
        let bar = catlin_bar(&p, &v(&[1]), 5).unwrap();
        // ψ(t)/t = t
        assert_eq!(bar.value, Value::Exact(rat(5, 1)));
        assert_eq!(bar.witness, Some(5));
        assert!(!bar.certified);
    }

    #[test]
    fn threshold_parts_sum_to_inner() {
        let spec = PsiSpec::power_law(rat(3, 1), rat(1, 1));
        let (small, large) = threshold_split(&spec);
        for h in 1..60i64 {
            let q = v(&[h, 2 * h]);
            let sum = small.eval(&q).unwrap().add(&large.eval(&q).unwrap());
            assert_eq!(sum, spec.eval(&q).unwrap());
        }
        let z = PsiSpec::zero();
        let (s, l) = threshold_split(&z);
        assert!(s.eval(&v(&[3])).unwrap().is_zero() && l.eval(&v(&[3])).unwrap().is_zero());
    }

    #[test]
    fn toml_and_json_config() {
        let text = r#"
            kind = "catlin_transform"
            t_max = 4
            [inner]
            kind = "radial_table"
            values = [{ h = 2, value = "1/10" }, { h = 4, value = 1 }]
        "#;
        let spec: PsiSpec = toml::from_str(text).unwrap();
        spec.validate().unwrap();
        assert_eq!(spec.eval_exact(&v(&[2])).unwrap(), rat(1, 2));
        let json = serde_json::to_string(&spec).unwrap();
        let back: PsiSpec = serde_json::from_str(&json).unwrap();
        assert_eq!(back, spec);
        let ds: PsiSpec =
            toml::from_str("kind = \"ds_counterexample\"\nN = 6\neta = \"1/10\"").unwrap();
        assert_eq!(
            ds,
            PsiSpec::DsCounterexample {
                big_n: 6,
                eta: rat(1, 10)
            }
        );
        let bad = toml::from_str::<PsiSpec>("kind = \"power_law\"\nc = \"1/0\"\ntau = 1");
        assert!(bad.is_err());
        let neg: PsiSpec = toml::from_str("kind = \"power_law\"\nc = \"-1\"\ntau = 1").unwrap();
        assert!(neg.validate().is_err());
    }
}
