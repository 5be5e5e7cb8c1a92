//! Exact number-theoretic primitives: totient, Möbius, vector gcd,
//! coprime-point counts and primitive-vector enumeration.

use std::fmt;

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// An integer row vector `q ∈ Zⁿ`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct IntVec(pub Vec<i64>);

impl IntVec {
    pub fn new(components: Vec<i64>) -> Self {
        IntVec(components)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&c| c == 0)
    }

    /// Sup-norm `|q| = max |q_i|`.
    pub fn sup_norm(&self) -> u64 {
        self.0.iter().map(|c| c.unsigned_abs()).max().unwrap_or(0)
    }

    pub fn in_orthant(&self) -> bool {
        self.0.iter().all(|&c| c >= 0)
    }

    pub fn scaled(&self, t: i64) -> IntVec {
        IntVec(self.0.iter().map(|c| c * t).collect())
    }

    pub fn components(&self) -> &[i64] {
        &self.0
    }
}

impl fmt::Display for IntVec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, c) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

impl From<Vec<i64>> for IntVec {
    fn from(v: Vec<i64>) -> Self {
        IntVec(v)
    }
}

/// `q = scale · direction` with `gcd(direction) = 1`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PrimitiveDecomposition {
    pub scale: u64,
    pub direction: IntVec,
}

/// Coprimality convention for `Φ_m`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PhiMode {
    /// `gcd(p_1, …, p_m, gcd(q)) = 1`.
    #[default]
    Joint,
    /// `gcd(p_i, gcd(q)) = 1` for every `i`.
    Componentwise,
}

pub fn vec_gcd(q: &IntVec) -> Result<u64> {
    let g = q.0.iter().fold(0u64, |g, c| g.gcd(&c.unsigned_abs()));
    if g == 0 {
        return Err(Error::domain("gcd of the zero vector is undefined"));
    }
    Ok(g)
}

fn require_positive(d: u64, op: &str) -> Result<()> {
    if d == 0 {
        Err(Error::domain(format!("{op}(0) is undefined")))
    } else {
        Ok(())
    }
}

/// Prime factorization as `(prime, exponent)` pairs in increasing order.
pub fn factorize(d: u64) -> Result<Vec<(u64, u32)>> {
    require_positive(d, "factorize")?;
    let mut out = Vec::new();
    let mut n = d;
    let mut p = 2u64;
    while p.saturating_mul(p) <= n {
        if n.is_multiple_of(p) {
            let mut e = 0;
            while n.is_multiple_of(p) {
                n /= p;
                e += 1;
            }
            out.push((p, e));
        }
        p += if p == 2 { 1 } else { 2 };
    }
    if n > 1 {
        out.push((n, 1));
    }
    Ok(out)
}

pub fn distinct_primes(d: u64) -> Result<Vec<u64>> {
    Ok(factorize(d)?.into_iter().map(|(p, _)| p).collect())
}

pub fn totient(d: u64) -> Result<u64> {
    Ok(factorize(d)?
        .into_iter()
        .fold(d, |acc, (p, _)| acc / p * (p - 1)))
}

pub fn mobius(d: u64) -> Result<i8> {
    let f = factorize(d)?;
    if f.iter().any(|&(_, e)| e > 1) {
        Ok(0)
    } else if f.len() % 2 == 0 {
        Ok(1)
    } else {
        Ok(-1)
    }
}

pub fn radical(d: u64) -> Result<u64> {
    Ok(distinct_primes(d)?.into_iter().product())
}

pub fn divisors(d: u64) -> Result<Vec<u64>> {
    let mut divs = vec![1u64];
    for (p, e) in factorize(d)? {
        let base = divs.clone();
        let mut pk = 1;
        for _ in 0..e {
            pk *= p;
            divs.extend(base.iter().map(|x| x * pk));
        }
    }
    divs.sort_unstable();
    Ok(divs)
}

/// Divisor sum `σ(d)`.
pub fn divisor_sum(d: u64) -> Result<u128> {
    Ok(divisors(d)?.into_iter().map(u128::from).sum())
}

/// Squarefree divisors of `d` with their Möbius signs.
fn signed_squarefree_divisors(d: u64) -> Result<Vec<(u64, i8)>> {
    let primes = distinct_primes(d)?;
    let mut out = vec![(1u64, 1i8)];
    for p in primes {
        let cur = out.clone();
        out.extend(cur.into_iter().map(|(e, s)| (e * p, -s)));
    }
    Ok(out)
}

/// `#{p ∈ Z : |p| ≤ bound, gcd(p, g) = 1}` via Möbius inversion over the
/// squarefree divisors of `g`.
pub fn coprime_count(bound: u64, g: u64) -> Result<u128> {
    require_positive(g, "coprime_count")?;
    let mut total: i128 = 0;
    for (e, s) in signed_squarefree_divisors(g)? {
        total += i128::from(s) * (2 * i128::from(bound / e) + 1);
    }
    Ok(total as u128)
}

/// `Φ_m(q) = #{p ∈ Z^m : |p| ≤ |q|, p coprime to q}` under the chosen mode.
pub fn phi_m(q: &IntVec, m: u32, mode: PhiMode) -> Result<BigUint> {
    let g = vec_gcd(q)?;
    let h = q.sup_norm();
    match mode {
        PhiMode::Componentwise => Ok(num_traits::pow(
            BigUint::from(coprime_count(h, g)?),
            m as usize,
        )),
        PhiMode::Joint => {
            let (mut pos, mut neg) = (BigUint::zero(), BigUint::zero());
            for (e, s) in signed_squarefree_divisors(g)? {
                let term = num_traits::pow(BigUint::from(2 * (h / e) + 1), m as usize);
                if s > 0 {
                    pos += term;
                } else {
                    neg += term;
                }
            }
            Ok(pos - neg)
        }
    }
}

pub fn primitive_part(q: &IntVec) -> Result<PrimitiveDecomposition> {
    let g = vec_gcd(q)?;
    Ok(PrimitiveDecomposition {
        scale: g,
        direction: IntVec(q.0.iter().map(|c| c / g as i64).collect()),
    })
}

/// Nonzero vectors of `Z^n_{≥0}` with sup-norm at most `h_max`, in
/// lexicographic order.
#[derive(Clone, Debug)]
pub struct OrthantVectors {
    h_max: i64,
    current: Vec<i64>,
    done: bool,
}

impl OrthantVectors {
    pub fn new(n: usize, h_max: u64) -> Self {
        let mut current = vec![0; n];
        let done = n == 0 || h_max == 0;
        if !done {
            current[n - 1] = 1;
        }
        OrthantVectors {
            h_max: h_max as i64,
            current,
            done,
        }
    }
}

impl Iterator for OrthantVectors {
    type Item = IntVec;

    fn next(&mut self) -> Option<IntVec> {
        if self.done {
            return None;
        }
        let out = IntVec(self.current.clone());
        let mut i = self.current.len();
        loop {
            if i == 0 {
                self.done = true;
                break;
            }
            i -= 1;
            if self.current[i] < self.h_max {
                self.current[i] += 1;
                break;
            }
            self.current[i] = 0;
        }
        Some(out)
    }
}

/// The primitive vectors `Pⁿ` with `|q| ≤ h_max`, lexicographic.
pub fn primitive_vectors(n: usize, h_max: u64) -> impl Iterator<Item = IntVec> {
    OrthantVectors::new(n, h_max).filter(|q| vec_gcd(q).map(|g| g == 1).unwrap_or(false))
}

/// Vectors of `Z^n_{≥0}` with sup-norm exactly `h`, lexicographic.
pub fn orthant_shell(n: usize, h: u64) -> impl Iterator<Item = IntVec> {
    fn fill(prefix: &mut Vec<i64>, left: usize, h: i64, hit: bool, out: &mut Vec<IntVec>) {
        if left == 0 {
            if hit {
                out.push(IntVec(prefix.clone()));
            }
            return;
        }
        if left == 1 && !hit {
            prefix.push(h);
            out.push(IntVec(prefix.clone()));
            prefix.pop();
            return;
        }
        for c in 0..=h {
            prefix.push(c);
            fill(prefix, left - 1, h, hit || c == h, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    if n > 0 && h > 0 {
        fill(&mut Vec::with_capacity(n), n, h as i64, false, &mut out);
    }
    out.into_iter()
}

pub fn gcd_i64(a: i64, b: i64) -> u64 {
    a.unsigned_abs().gcd(&b.unsigned_abs())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(c: &[i64]) -> IntVec {
        IntVec(c.to_vec())
    }

    fn brute_coprime_count(bound: u64, g: u64) -> u128 {
        let b = bound as i64;
        (-b..=b).filter(|&p| gcd_i64(p, g as i64) == 1).count() as u128
    }

    #[test]
    fn gcd_examples() {
        assert_eq!(vec_gcd(&v(&[3, 5])), Ok(1));
        assert_eq!(vec_gcd(&v(&[0, 0, 5])), Ok(5));
        assert_eq!(vec_gcd(&v(&[4, 6])), Ok(2));
        assert!(matches!(vec_gcd(&v(&[0, 0])), Err(Error::Domain(_))));
    }

    #[test]
    fn totient_examples() {
        assert_eq!(totient(1), Ok(1));
        assert_eq!(totient(13), Ok(12));
        let brute = (1..=12u64).filter(|k| k.gcd(&12) == 1).count() as u64;
        assert_eq!(brute, 4);
        assert_eq!(totient(12), Ok(brute));
        assert!(totient(0).is_err());
    }

    #[test]
    fn mobius_radical_factorize() {
        assert_eq!(mobius(1), Ok(1));
        assert_eq!(mobius(12), Ok(0));
        assert_eq!(mobius(30), Ok(-1));
        assert_eq!(radical(12), Ok(6));
        assert_eq!(factorize(360), Ok(vec![(2, 3), (3, 2), (5, 1)]));
        assert!(mobius(0).is_err());
        assert!(radical(0).is_err());
        assert_eq!(divisor_sum(6), Ok(12));
    }

    #[test]
    fn coprime_count_examples() {
        assert_eq!(coprime_count(5, 1), Ok(11));
        assert_eq!(brute_coprime_count(6, 6), 4);
        assert_eq!(coprime_count(6, 6), Ok(4));
        assert_eq!(brute_coprime_count(10, 4), 10);
        assert_eq!(coprime_count(10, 4), Ok(10));
        assert_eq!(coprime_count(0, 1), Ok(1));
        assert_eq!(coprime_count(0, 2), Ok(0));
    }

    #[test]
    fn coprime_count_matches_brute_force_on_a_grid() {
        for g in 1..=60 {
            for bound in 0..=60 {
                assert_eq!(
                    coprime_count(bound, g).unwrap(),
                    brute_coprime_count(bound, g)
                );
            }
        }
    }

    #[test]
    fn phi_m_examples() {
        assert_eq!(
            phi_m(&v(&[2, 4]), 2, PhiMode::Joint),
            Ok(BigUint::from(56u32))
        );
        assert_eq!(
            phi_m(&v(&[2, 4]), 2, PhiMode::Componentwise),
            Ok(BigUint::from(16u32))
        );
        for m in 1..4 {
            let expect = BigUint::from(11u32).pow(m);
            assert_eq!(phi_m(&v(&[3, 5]), m, PhiMode::Joint).unwrap(), expect);
            assert_eq!(
                phi_m(&v(&[3, 5]), m, PhiMode::Componentwise).unwrap(),
                expect
            );
        }
        assert!(phi_m(&v(&[0]), 1, PhiMode::Joint).is_err());
    }

    #[test]
    fn primitive_vector_examples() {
        let got: Vec<_> = primitive_vectors(2, 2).collect();
        assert_eq!(
            got,
            vec![v(&[0, 1]), v(&[1, 0]), v(&[1, 1]), v(&[1, 2]), v(&[2, 1])]
        );
        let got: Vec<_> = primitive_vectors(1, 5).collect();
        assert_eq!(got, vec![v(&[1])]);
        let got: Vec<_> = primitive_vectors(2, 1).collect();
        assert_eq!(got, vec![v(&[0, 1]), v(&[1, 0]), v(&[1, 1])]);
    }

    #[test]
    fn orthant_and_shells() {
        assert_eq!(OrthantVectors::new(2, 3).count(), 15);
        assert_eq!(orthant_shell(2, 3).count(), 7);
        assert_eq!(OrthantVectors::new(3, 0).count(), 0);
        for n in 1..4 {
            for h in 1..6 {
                let by_filter: Vec<IntVec> = OrthantVectors::new(n, h)
                    .filter(|q| q.sup_norm() == h)
                    .collect();
                assert_eq!(orthant_shell(n, h).collect::<Vec<_>>(), by_filter);
            }
        }
    }

    #[test]
    fn primitive_part_examples() {
        let d = primitive_part(&v(&[2, 4])).unwrap();
        assert_eq!((d.scale, d.direction), (2, v(&[1, 2])));
        let d = primitive_part(&v(&[7])).unwrap();
        assert_eq!((d.scale, d.direction), (7, v(&[1])));
        let d = primitive_part(&v(&[6, 10, 15])).unwrap();
        assert_eq!((d.scale, d.direction), (1, v(&[6, 10, 15])));
        assert!(primitive_part(&v(&[0, 0])).is_err());
    }
}
