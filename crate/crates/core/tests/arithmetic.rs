use dslab_core::arith::{
    coprime_count, divisor_sum, divisors, mobius, phi_m, primitive_part, radical, totient, vec_gcd,
    IntVec, PhiMode,
};
use num_bigint::BigUint;
use num_integer::Integer;
use proptest::prelude::*;

fn brute_totient(d: u64) -> u64 {
    (1..=d).filter(|k| k.gcd(&d) == 1).count() as u64
}

proptest! {
    #[test]
    fn totient_counts_units(d in 1u64..3000) {
        prop_assert_eq!(totient(d).unwrap(), brute_totient(d));
    }

    #[test]
    fn mobius_sums_to_indicator(d in 1u64..3000) {
        let s: i64 = divisors(d).unwrap().into_iter().map(|k| i64::from(mobius(k).unwrap())).sum();
        prop_assert_eq!(s, i64::from(d == 1));
    }

    #[test]
    fn gauss_identity(d in 1u64..3000) {
        let s: u64 = divisors(d).unwrap().into_iter().map(|k| totient(k).unwrap()).sum();
        prop_assert_eq!(s, d);
    }

    #[test]
    fn divisor_sum_matches(d in 1u64..3000) {
        let s: u128 = (1..=d).filter(|k| d % k == 0).map(u128::from).sum();
        prop_assert_eq!(divisor_sum(d).unwrap(), s);
    }

    #[test]
    fn radical_divides_and_is_squarefree(d in 1u64..100_000) {
        let rad = radical(d).unwrap();
        prop_assert_eq!(d % rad, 0);
        prop_assert!(mobius(rad).unwrap() != 0);
    }

    #[test]
    fn coprime_count_is_a_count(bound in 0u64..400, g in 1u64..400) {
        let b = bound as i64;
        let want = (-b..=b).filter(|p| p.unsigned_abs().gcd(&g) == 1).count() as u128;
        prop_assert_eq!(coprime_count(bound, g).unwrap(), want);
    }

    #[test]
    fn primitive_part_reassembles(v in prop::collection::vec(0i64..50, 1..4)) {
        prop_assume!(v.iter().any(|&c| c != 0));
        let q = IntVec(v);
        let dec = primitive_part(&q).unwrap();
        prop_assert_eq!(dec.direction.scaled(dec.scale as i64), q.clone());
        prop_assert_eq!(vec_gcd(&dec.direction).unwrap(), 1);
        prop_assert_eq!(dec.scale, vec_gcd(&q).unwrap());
    }

    #[test]
    fn phi_m_depends_on_gcd_and_height(v in prop::collection::vec(0i64..12, 1..3), m in 1u32..3) {
        prop_assume!(v.iter().any(|&c| c != 0));
        let q = IntVec(v);
        let h = q.sup_norm() as i64;
        let g = vec_gcd(&q).unwrap();
        // componentwise count: each coordinate independently coprime to g
        let per = (-h..=h).filter(|p| p.unsigned_abs().gcd(&g) == 1).count() as u64;
        prop_assert_eq!(phi_m(&q, m, PhiMode::Componentwise).unwrap(), BigUint::from(per).pow(m));
        let joint = phi_m(&q, m, PhiMode::Joint).unwrap();
        prop_assert!(joint >= phi_m(&q, m, PhiMode::Componentwise).unwrap());
        prop_assert!(joint <= BigUint::from((2 * h + 1) as u64).pow(m));
    }
}

#[test]
fn rejects_zero() {
    assert!(totient(0).is_err());
    assert!(vec_gcd(&IntVec(vec![0, 0])).is_err());
    assert!(coprime_count(3, 0).is_err());
}
