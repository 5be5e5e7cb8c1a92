use std::collections::BTreeMap;

use dslab_core::arith::{IntVec, PhiMode};
use dslab_core::psi::PsiSpec;
use dslab_core::series::{
    bv_sum, catlin_sum, ds_sum, ds_sum_factored, hausdorff_ds_sum, khintchine_sum,
};
use dslab_core::value::Value;
use dslab_core::Rational;
use num_integer::Integer;
use num_traits::Zero;
use proptest::prelude::*;

fn r(n: i64, d: i64) -> Rational {
    Rational::new(n.into(), d.into())
}

fn units(g: i64) -> i64 {
    (1..=g).filter(|k| k.gcd(&g) == 1).count() as i64
}

fn all_vectors(n: usize, h: i64) -> Vec<Vec<i64>> {
    let mut out = vec![vec![]];
    for _ in 0..n {
        out = out
            .into_iter()
            .flat_map(|v| (0..=h).map(move |c| [v.clone(), vec![c]].concat()))
            .collect();
    }
    out.retain(|v| v.iter().any(|&c| c != 0));
    out
}

fn table(entries: &[(Vec<i64>, (i64, i64))]) -> PsiSpec {
    let values: BTreeMap<IntVec, Rational> = entries
        .iter()
        .map(|(q, (a, b))| (IntVec(q.clone()), r(*a, *b)))
        .collect();
    PsiSpec::ExplicitTable {
        n: entries[0].0.len(),
        values,
    }
}

fn entries() -> impl Strategy<Value = Vec<(Vec<i64>, (i64, i64))>> {
    prop::collection::vec(
        (prop::collection::vec(0i64..7, 2), (0i64..9, 1i64..9)),
        1..12,
    )
    .prop_filter("nonzero q", |v| {
        v.iter().all(|(q, _)| q.iter().any(|&c| c != 0))
    })
}

fn lookup(entries: &[(Vec<i64>, (i64, i64))], q: &[i64]) -> Rational {
    // later entries win, as in a map built by insertion
    entries
        .iter()
        .rev()
        .find(|(k, _)| k == q)
        .map_or(Rational::zero(), |(_, (a, b))| r(*a, *b))
}

proptest! {
    #[test]
    fn ds_sum_matches_a_double_loop(e in entries(), m in 1u32..4, big_q in 1u64..8) {
        let spec = table(&e);
        let mut want = Rational::zero();
        for q in all_vectors(2, big_q as i64) {
            let g = q.iter().fold(0, |a: i64, &c| a.gcd(&c));
            want += num_traits::pow(lookup(&e, &q) * r(units(g), g), m as usize);
        }
        prop_assert_eq!(ds_sum(&spec, 2, m, big_q).unwrap().partial_sum, Value::Exact(want));
    }

    #[test]
    fn bv_sum_matches_a_double_loop(e in entries(), m in 1u32..4) {
        let spec = table(&e);
        let want: Rational = all_vectors(2, 6).iter().map(|q| num_traits::pow(lookup(&e, q), m as usize)).sum();
        prop_assert_eq!(bv_sum(&spec, 2, m, 6).unwrap().partial_sum, Value::Exact(want));
    }

    #[test]
    fn hausdorff_with_s_equal_m_is_ds(e in entries(), m in 1u32..3) {
        let spec = table(&e);
        let s = Rational::from_integer(m.into());
        prop_assert_eq!(
            hausdorff_ds_sum(&spec, 2, m, &s, 6).unwrap().partial_sum,
            ds_sum(&spec, 2, m, 6).unwrap().partial_sum
        );
    }

    #[test]
    fn catlin_dominates_with_t_max(e in entries(), t in 1u64..5) {
        let spec = table(&e);
        let a = catlin_sum(&spec, 2, 1, 6, t, PhiMode::Joint).unwrap().partial_sum;
        let b = catlin_sum(&spec, 2, 1, 6, t + 1, PhiMode::Joint).unwrap().partial_sum;
        prop_assert!(a.exact().unwrap() <= b.exact().unwrap());
    }
}

#[test]
fn factored_sum_covers_the_plain_sum() {
    let spec = PsiSpec::power_law(r(1, 1), r(2, 1));
    // every q with |q| ≤ 6 is d·q′ with |q′| ≤ 6 and d ≤ 6
    let plain = ds_sum(&spec, 2, 2, 6).unwrap().partial_sum;
    let factored = ds_sum_factored(&spec, 2, 2, 6, 6).unwrap().partial_sum;
    assert!(plain.exact().unwrap() < factored.exact().unwrap());
    let one = ds_sum(&spec, 1, 2, 1).unwrap().partial_sum;
    assert_eq!(one, ds_sum_factored(&spec, 1, 2, 1, 1).unwrap().partial_sum);
}

#[test]
fn harmonic_khintchine_partials() {
    let spec = PsiSpec::power_law(r(1, 1), r(1, 1));
    let got = khintchine_sum(&spec, 1, 4).unwrap().partial_sum;
    assert_eq!(got, Value::Exact(r(25, 12)));
}

#[test]
fn irrational_powers_are_enclosed() {
    let spec = PsiSpec::power_law(r(1, 1), r(1, 2));
    let got = khintchine_sum(&spec, 1, 50).unwrap().partial_sum;
    let truth: f64 = (1..=50).map(|k| 1.0 / (k as f64).sqrt()).sum();
    let (lo, hi) = got.bounds();
    assert!(lo <= truth && truth <= hi && hi - lo < 1e-10);
}
