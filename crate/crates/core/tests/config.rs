use dslab_core::arith::IntVec;
use dslab_core::psi::{Part, PsiSpec};
use dslab_core::Rational;

fn r(n: i64, d: i64) -> Rational {
    Rational::new(n.into(), d.into())
}

#[test]
fn specs_round_trip_through_json_and_toml() {
    let specs = vec![
        PsiSpec::power_law(r(1, 3), r(3, 2)),
        PsiSpec::RadialTable {
            values: [(1, r(1, 2)), (7, r(2, 9))].into_iter().collect(),
        },
        PsiSpec::ExplicitTable {
            n: 2,
            values: [(IntVec(vec![1, 2]), r(1, 5))].into_iter().collect(),
        },
        PsiSpec::DsCounterexample {
            big_n: 30,
            eta: r(1, 10),
        },
        PsiSpec::CatlinTransform {
            inner: Box::new(PsiSpec::power_law(r(1, 1), r(2, 1))),
            t_max: 5,
        },
        PsiSpec::ThresholdPart {
            inner: Box::new(PsiSpec::power_law(r(1, 1), r(0, 1))),
            part: Part::Large,
        },
    ];
    for spec in specs {
        let js = serde_json::to_string(&spec).unwrap();
        assert_eq!(serde_json::from_str::<PsiSpec>(&js).unwrap(), spec, "{js}");
        let wrapped = toml::to_string(&serde_json::json!({ "psi": spec })).unwrap();
        let back: toml::Value = toml::from_str(&wrapped).unwrap();
        let spec2: PsiSpec = back["psi"].clone().try_into().unwrap();
        assert_eq!(spec2, spec, "{wrapped}");
    }
}

#[test]
fn hand_written_toml() {
    let text = r#"
        kind = "power_law"
        c = "1/2"
        tau = 1
    "#;
    let spec: PsiSpec = toml::from_str(text).unwrap();
    assert_eq!(spec, PsiSpec::power_law(r(1, 2), r(1, 1)));
    assert_eq!(spec.eval_exact(&IntVec(vec![0, 4])).unwrap(), r(1, 8));
}

#[test]
fn unknown_fields_and_bad_values_are_rejected() {
    assert!(toml::from_str::<PsiSpec>("kind = \"power_law\"\nc = 1\ntau = 1\nextra = 2").is_err());
    assert!(toml::from_str::<PsiSpec>("kind = \"nope\"").is_err());
    let negative = PsiSpec::power_law(r(-1, 1), r(1, 1));
    assert!(negative.validate().is_err());
}
