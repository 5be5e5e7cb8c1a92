use dslab_core::torus::{approx_set_1d, ArcUnion, NumeratorMode};
use dslab_core::{ExactArcs, FastArcs, Rational};
use num_traits::{One, ToPrimitive, Zero};
use proptest::prelude::*;

fn r(n: i64, d: i64) -> Rational {
    Rational::new(n.into(), d.into())
}

fn intervals() -> impl Strategy<Value = Vec<(i64, i64)>> {
    prop::collection::vec((-30i64..60, 0i64..40), 0..6)
}

fn build(raw: &[(i64, i64)]) -> ExactArcs {
    ArcUnion::from_intervals(raw.iter().map(|&(l, len)| (r(l, 24), r(l + len, 24))))
}

// a point lies in some raw interval after reduction mod 1
fn naive_contains(raw: &[(i64, i64)], x: &Rational) -> bool {
    raw.iter().any(|&(l, len)| {
        let (l, rr) = (r(l, 24), r(l + len, 24));
        (-2..=5).any(|k| {
            let y = x + Rational::from_integer(k.into());
            l <= y && y < rr
        })
    })
}

fn probes() -> Vec<Rational> {
    (0..96)
        .map(|k| r(2 * k + 1, 192))
        .chain((0..48).map(|k| r(k, 48)))
        .collect()
}

proptest! {
    #[test]
    fn membership_matches_the_raw_intervals(a in intervals(), b in intervals()) {
        let (u, v) = (build(&a), build(&b));
        for x in probes() {
            prop_assert_eq!(u.contains(&x), naive_contains(&a, &x));
            prop_assert_eq!(u.union(&v).contains(&x), naive_contains(&a, &x) || naive_contains(&b, &x));
            prop_assert_eq!(u.intersect(&v).contains(&x), naive_contains(&a, &x) && naive_contains(&b, &x));
            prop_assert_eq!(u.complement().contains(&x), !naive_contains(&a, &x));
        }
    }

    #[test]
    fn measure_is_the_fraction_of_fine_cells(a in intervals()) {
        // endpoints are multiples of 1/24, so midpoints of 1/48 cells decide everything
        let u = build(&a);
        let hits = (0..48).filter(|&k| naive_contains(&a, &r(2 * k + 1, 96))).count();
        prop_assert_eq!(u.measure(), r(hits as i64, 48));
    }

    #[test]
    fn inclusion_exclusion(a in intervals(), b in intervals()) {
        let (u, v) = (build(&a), build(&b));
        prop_assert_eq!(u.union(&v).measure() + u.intersect(&v).measure(), u.measure() + v.measure());
        prop_assert_eq!(u.complement().complement(), u.clone());
        prop_assert!(u.measure() >= Rational::zero() && u.measure() <= Rational::one());
    }

    #[test]
    fn arcs_stay_canonical(a in intervals(), b in intervals()) {
        let w = build(&a).union(&build(&b));
        let arcs = w.arcs();
        for (l, rr) in arcs {
            prop_assert!(Rational::zero() <= *l && l < rr && *rr <= Rational::one());
        }
        for pair in arcs.windows(2) {
            prop_assert!(pair[0].1 < pair[1].0);
        }
    }

    #[test]
    fn float_arcs_track_exact_ones(d in 1u64..60, num in 0i64..40, den in 1i64..40) {
        let eps = r(num, den);
        let exact = approx_set_1d(d, &eps, &NumeratorMode::Coprime).unwrap().measure();
        let fast: FastArcs = approx_set_1d(d, &eps.to_f64().unwrap(), &NumeratorMode::Coprime).unwrap();
        prop_assert!((fast.measure() - exact.to_f64().unwrap()).abs() < 1e-9);
    }
}

#[test]
fn full_and_empty() {
    let full = ExactArcs::full();
    assert!(full.is_full());
    assert!(full.complement().is_empty());
    assert_eq!(
        ExactArcs::from_intervals([(r(-1, 4), r(1, 4))])
            .arcs()
            .len(),
        2
    );
    assert!(ExactArcs::from_intervals([(r(0, 1), r(3, 2))]).is_full());
}
