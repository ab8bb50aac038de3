use leray_cli::spec::{DomainSpec, ProfileSpec};
use leray_core::domain::DomainModel;
use leray_core::duality::polar;
use proptest::prelude::*;

fn reparse(d: &DomainModel) -> DomainModel {
    let text = serde_json::to_string(&DomainSpec::of_model(d)).unwrap();
    serde_json::from_str::<DomainSpec>(&text).unwrap().build().unwrap()
}

fn assert_same(a: &DomainModel, b: &DomainModel) {
    assert_eq!(a.class_tag(), b.class_tag());
    for j in 0..=100 {
        let s = f64::from(j) / 100.0;
        let (x, y) = (a.radii(s), b.radii(s));
        assert!((x.0 - y.0).abs() < 1e-9 && (x.1 - y.1).abs() < 1e-9, "s={s}: {x:?} vs {y:?}");
    }
}

fn bump(height: f64) -> Vec<f64> {
    (0..=512)
        .map(|k| {
            let s = f64::from(k) / 512.0;
            2.0 + height * s * (1.0 - s)
        })
        .collect()
}

#[test]
fn builtins_and_polars() {
    let specs = [
        ProfileSpec::Example1 { inner: None, outer: None },
        ProfileSpec::Example2 { nu: 0.5, inner: None, outer: None },
        ProfileSpec::Example3,
        ProfileSpec::Tabulated { values: bump(4.0) },
        ProfileSpec::Conjugate { of: Box::new(ProfileSpec::Example3) },
    ];
    for profile in specs {
        let d = DomainSpec::Generator { b1: None, b2: None, profile }.build().unwrap();
        assert_same(&d, &reparse(&d));
        if let Ok(pd) = polar(&d) {
            assert_same(&pd, &reparse(&pd));
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn pball_roundtrip(p in 1.1f64..8.0, a1 in 0.1f64..10.0, a2 in 0.1f64..10.0) {
        let d = DomainModel::from_pball(p, a1, a2).unwrap();
        assert_same(&d, &reparse(&d));
        let pd = polar(&d).unwrap();
        assert_same(&pd, &reparse(&pd));
    }

    #[test]
    fn generator_roundtrip(h in 0.0f64..6.0, b1 in 0.2f64..5.0, b2 in 0.2f64..5.0, constant in 1.2f64..5.0) {
        for profile in [ProfileSpec::Tabulated { values: bump(h) }, ProfileSpec::Constant { p: constant }] {
            let d = DomainSpec::Generator { b1: Some(b1), b2: Some(b2), profile }.build().unwrap();
            assert_same(&d, &reparse(&d));
            let pd = polar(&d).unwrap();
            assert_same(&pd, &reparse(&pd));
        }
    }
}
