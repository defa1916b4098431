mod common;

use ars2d::model::{lie_bracket, BundleOrientation, FixtureParams, ModelError};
use ars2d::{parse, ArsSpec, PointClass, SurfaceChart, Vec2, VectorField};
use common::fixture;
use proptest::prelude::*;

const COMPONENTS: &[&str] = &[
    "1",
    "x",
    "y",
    "x*y",
    "x^2 - y",
    "sin(x)",
    "cos(2*y)",
    "exp(x - y)",
    "atan(x + 2*y)",
    "x^3 + y^2",
];

fn field(i: usize, j: usize) -> VectorField {
    VectorField::parse(COMPONENTS[i], COMPONENTS[j]).unwrap()
}

fn arb_field() -> impl Strategy<Value = VectorField> {
    (0..COMPONENTS.len(), 0..COMPONENTS.len()).prop_map(|(i, j)| field(i, j))
}

fn arb_point() -> impl Strategy<Value = Vec2> {
    (-1.0f64..1.0, -1.0f64..1.0).prop_map(|(x, y)| Vec2::new(x, y))
}

proptest! {
    #[test]
    fn bracket_is_antisymmetric(v in arb_field(), w in arb_field(), p in arb_point()) {
        let a = lie_bracket(&v, &w).eval(p).unwrap();
        let b = lie_bracket(&w, &v).eval(p).unwrap();
        prop_assert!((a + b).norm() <= 1e-12 * (1.0 + a.norm()));
    }

    #[test]
    fn bracket_satisfies_jacobi(u in arb_field(), v in arb_field(), w in arb_field(), p in arb_point()) {
        let terms = [
            lie_bracket(&u, &lie_bracket(&v, &w)).eval(p).unwrap(),
            lie_bracket(&v, &lie_bracket(&w, &u)).eval(p).unwrap(),
            lie_bracket(&w, &lie_bracket(&u, &v)).eval(p).unwrap(),
        ];
        let scale: f64 = terms.iter().map(|t| t.norm()).sum();
        prop_assert!((terms[0] + terms[1] + terms[2]).norm() <= 1e-10 * (1.0 + scale));
    }

    #[test]
    fn metric_cost_is_quadratic(p in arb_point(), v in arb_point(), c in -3.0f64..3.0) {
        let spec = fixture("F3");
        let g = spec.metric_cost(p, v).unwrap();
        let gc = spec.metric_cost(p, c * v).unwrap();
        prop_assert!((gc - c * c * g).abs() <= 1e-9 * (1.0 + gc.abs()));
    }

    #[test]
    fn metric_cost_of_a_control_is_at_most_its_norm(p in arb_point(), a in -2.0f64..2.0, b in -2.0f64..2.0) {
        let spec = fixture("F3");
        let (x, y) = spec.frame_at(p).unwrap();
        let g = spec.metric_cost(p, a * x + b * y).unwrap();
        prop_assert!(g <= (a * a + b * b) * (1.0 + 1e-9) + 1e-12);
    }
}

#[test]
fn bracket_of_coordinate_fields() {
    let x = VectorField::parse("1", "0").unwrap();
    let y = VectorField::parse("0", "x").unwrap();
    let b = lie_bracket(&x, &y).eval(Vec2::new(0.3, -0.2)).unwrap();
    assert_eq!(b, Vec2::new(0.0, 1.0));
}

#[test]
fn grushin_metric_at_the_locus() {
    let spec = fixture("grushin-plane");
    let p = Vec2::new(0.0, 0.4);
    assert_eq!(spec.metric_cost(p, Vec2::new(1.0, 0.0)).unwrap(), 1.0);
    assert_eq!(
        spec.metric_cost(p, Vec2::new(0.0, 1.0)).unwrap(),
        f64::INFINITY
    );
    let q = Vec2::new(0.5, 0.4);
    assert!((spec.metric_cost(q, Vec2::new(0.0, 1.0)).unwrap() - 4.0).abs() < 1e-12);
}

/// Points of each fixture with their expected class.
fn labelled_points() -> Vec<(&'static str, Vec2, PointClass)> {
    vec![
        ("grushin-plane", Vec2::new(0.4, 0.1), PointClass::Ordinary),
        ("grushin-plane", Vec2::new(0.0, 0.1), PointClass::Grushin),
        ("F1", Vec2::new(0.0, 0.0), PointClass::Ordinary),
        ("F2", Vec2::new(0.0, -0.3), PointClass::Grushin),
        ("F3", Vec2::new(0.0, 0.0), PointClass::Tangency),
        ("F3", Vec2::new(0.5, 0.25), PointClass::Grushin),
        ("F3", Vec2::new(0.5, -0.5), PointClass::Ordinary),
        (
            "tangency-torus",
            Vec2::new(0.0, 1.0 / 12.0),
            PointClass::Tangency,
        ),
        ("tangency-torus", Vec2::new(0.25, 0.0), PointClass::Grushin),
    ]
}

#[test]
fn fixtures_classify_as_expected() {
    for (name, p, class) in labelled_points() {
        assert_eq!(
            fixture(name).classify_point(p).unwrap(),
            class,
            "{name} at {p:?}"
        );
    }
}

#[test]
fn classification_is_invariant_under_rescaling_the_frame() {
    for f in [
        "2",
        "exp(sin(2*pi*x)*cos(2*pi*y))",
        "1/(2 + sin(2*pi*x))",
        "1.5 + cos(2*pi*y)",
    ] {
        let f = parse(f).unwrap();
        for (name, p, class) in labelled_points() {
            let scaled = fixture(name).with_scaled_frame(&f).unwrap();
            assert_eq!(
                scaled.classify_point(p).unwrap(),
                class,
                "{name} scaled by {f} at {p:?}"
            );
        }
    }
}

#[test]
fn classification_is_invariant_under_frame_changes() {
    for (name, p, class) in labelled_points() {
        let s = fixture(name);
        let mix = |a: &VectorField, ka: &str, b: &VectorField, kb: &str| {
            let e = |u: &ars2d::Expr, v: &ars2d::Expr| {
                parse(&format!("({ka})*({u}) + ({kb})*({v})")).unwrap()
            };
            VectorField::new(e(&a.e1, &b.e1), e(&a.e2, &b.e2))
        };
        let x = mix(&s.x, "2", &s.y, "1");
        let y = mix(&s.x, "cos(2*pi*y)", &s.y, "3");
        let changed = ArsSpec::new(s.chart.clone(), x, y, s.orientation).unwrap();
        assert_eq!(changed.classify_point(p).unwrap(), class, "{name} at {p:?}");
        assert_eq!(s.reversed().classify_point(p).unwrap(), class);
    }
}

#[test]
fn points_outside_a_plane_chart_are_rejected() {
    let err = fixture("F3")
        .classify_point(Vec2::new(2.0, 0.0))
        .unwrap_err();
    assert!(matches!(err, ModelError::OutsideChart(_)));
}

#[test]
fn structures_round_trip_through_json() {
    for name in ars2d::model::FIXTURE_NAMES {
        let s = fixture(name);
        let back = ArsSpec::from_json(&s.to_json()).unwrap();
        assert_eq!(back, s);
        assert_eq!(back.digest(), s.digest());
    }
    assert_ne!(fixture("F2").digest(), fixture("F3").digest());
}

#[test]
fn non_periodic_torus_frames_are_rejected() {
    let err = ArsSpec::new(
        SurfaceChart::Torus {
            periods: [1.0, 1.0],
        },
        VectorField::parse("1", "0").unwrap(),
        VectorField::parse("0", "x").unwrap(),
        BundleOrientation::Positive,
    )
    .unwrap_err();
    assert!(matches!(err, ModelError::NotPeriodic { .. }), "{err}");
}

#[test]
fn normal_form_parameters_are_validated() {
    let bad = FixtureParams {
        phi: "x + y".into(),
        ..FixtureParams::default()
    };
    assert!(ars2d::model::builtin("F1", &bad).is_err());
    let bad = FixtureParams {
        psi: "-1".into(),
        ..FixtureParams::default()
    };
    assert!(ars2d::model::builtin("F3", &bad).is_err());
    let ok = FixtureParams {
        phi: "x*y".into(),
        psi: "2 + x".into(),
        xi: "y".into(),
    };
    for name in ["F1", "F2", "F3"] {
        assert!(ars2d::model::builtin(name, &ok).unwrap().is_some());
    }
}
