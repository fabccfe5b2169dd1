use approx::assert_abs_diff_eq;
use isodensity::density::{estimate_seminorm, nested_volume_integrand, DensityField, DensitySpec, WorkingBox};
use isodensity::{Error, Execution};

/// Dense 121×121 scan of `example1_h(0.5)` over `[−1, 1]²`, all pairs.
const EXAMPLE1_SCAN_121: f64 = 1.336_666_916_663_223_5;
/// Supremum of the same quotient, attained along the diagonal at the
/// origin: `(2√ε/(1+2√ε)) / (√2 ε)^{1/2} → 2^{3/4}`.
const EXAMPLE1_SUP: f64 = 1.681_792_830_507_429;

#[test]
fn constant_field_has_zero_seminorm() {
    let bx = WorkingBox::centered(2, 1.0, 10.0).unwrap();
    let f = DensityField::from_spec(&DensitySpec::Constant { c: 1.0 }, &bx).unwrap();
    assert_eq!(estimate_seminorm(&f, &bx, 10_000, 11, Execution::Parallel).unwrap(), 0.0);
}

#[test]
fn radial_holder_seminorm_approaches_one() {
    let bx = WorkingBox::centered(1, 1.0, 1.0).unwrap();
    let f = DensityField::from_spec(&DensitySpec::RadialHolder { alpha: 0.5, c0: 1.0 }, &bx).unwrap();
    let coarse = estimate_seminorm(&f, &bx, 1_000, 4, Execution::Parallel).unwrap();
    let fine = estimate_seminorm(&f, &bx, 100_000, 4, Execution::Parallel).unwrap();
    assert!(fine <= 1.0 + 1e-12, "{fine}");
    assert!(fine >= coarse);
    assert!(fine > 0.99, "{fine}");
}

#[test]
fn example1_h_seminorm_matches_dense_scan() {
    let bx = WorkingBox::centered(1, 1.0, 1.0).unwrap();
    let f = DensityField::from_spec(&DensitySpec::Example1H { alpha: 0.5 }, &bx).unwrap();
    assert!(f.holder_seminorm >= EXAMPLE1_SUP, "certified {} below the supremum", f.holder_seminorm);
    let s = estimate_seminorm(&f, &bx, 20_000, 9, Execution::Parallel).unwrap();
    assert!(s.is_finite());
    assert!(s >= EXAMPLE1_SCAN_121, "{s} below the dense scan");
    assert!(s <= EXAMPLE1_SUP * (1.0 + 1e-9), "{s} above the supremum");
}

#[test]
fn seminorm_is_deterministic_across_execution_modes() {
    let bx = WorkingBox::centered(2, 0.5, 2.0).unwrap();
    let f = DensityField::from_spec(&DensitySpec::Example1H { alpha: 0.3 }, &bx).unwrap();
    let a = estimate_seminorm(&f, &bx, 3_000, 21, Execution::Sequential).unwrap();
    let b = estimate_seminorm(&f, &bx, 3_000, 21, Execution::Parallel).unwrap();
    assert_eq!(a.to_bits(), b.to_bits());
}

#[test]
fn non_finite_evaluation_names_the_point() {
    let bx = WorkingBox::centered(1, 1.0, 1.0).unwrap();
    let f = DensityField::custom("bad", |x, t| if x[0] > 0.9 && t > 0.0 { f64::NAN } else { 1.0 }, 1.0, 0.0, (1.0, 1.0));
    let err = estimate_seminorm(&f, &bx, 5_000, 1, Execution::Sequential).unwrap_err();
    match err {
        Error::EvaluationFailure { label, point } => {
            assert_eq!(label, "bad");
            assert!(point[0] > 0.9 && point[1] > 0.0);
        }
        other => panic!("unexpected error {other}"),
    }
    let err = nested_volume_integrand(&f, &[0.95], 0.5).unwrap_err();
    assert!(matches!(err, Error::EvaluationFailure { .. }));
}

#[test]
fn nested_volume_of_constant_density() {
    let one = DensityField::constant(1.0);
    assert_abs_diff_eq!(nested_volume_integrand(&one, &[0.3], 0.7).unwrap(), 0.7, epsilon = 1e-14);
    assert_abs_diff_eq!(nested_volume_integrand(&one, &[0.3], -0.3).unwrap(), -0.3, epsilon = 1e-14);
    assert_eq!(nested_volume_integrand(&one, &[0.3], 0.0).unwrap(), 0.0);
}

#[test]
fn nested_volume_by_quadrature() {
    // A closure has no closed form, so this goes through the Simpson path.
    let f = DensityField::custom("1 + t", |_, t| 1.0 + t, 1.0, 1.0, (0.5, 2.0));
    assert_abs_diff_eq!(nested_volume_integrand(&f, &[0.0], 1.0).unwrap(), 1.5, epsilon = 1e-10);
    assert_abs_diff_eq!(nested_volume_integrand(&f, &[0.0], -0.5).unwrap(), -0.5 + 0.125, epsilon = 1e-10);
}

#[test]
fn nested_volume_of_cusp_density_matches_closed_form() {
    // ∫₀^w (c₀ + |t|^α) dt = c₀ w + w^{1+α}/(1+α) for w > 0.
    let alpha = 0.4;
    let f = DensityField::custom("1 + |t|^0.4", move |_, t: f64| 1.0 + t.abs().powf(alpha), alpha, 1.0, (1.0, 3.0));
    for w in [1e-3f64, 0.2, 1.7] {
        let exact = w + w.powf(1.0 + alpha) / (1.0 + alpha);
        let v = nested_volume_integrand(&f, &[0.0], w).unwrap();
        assert!((v - exact).abs() <= 1e-9 * exact, "w = {w}: {v} vs {exact}");
    }
}

#[test]
fn non_finite_height_is_rejected() {
    let one = DensityField::constant(1.0);
    assert!(nested_volume_integrand(&one, &[0.0], f64::INFINITY).is_err());
}

#[test]
fn catalog_bounds_hold_on_the_box() {
    let bx = WorkingBox::centered(2, 1.0, 10.0).unwrap();
    let specs = [
        DensitySpec::Example1H { alpha: 0.5 },
        DensitySpec::Example1Reciprocal { alpha: 0.7 },
        DensitySpec::RadialHolder { alpha: 0.3, c0: 0.5 },
        DensitySpec::Product {
            factors: vec![DensitySpec::AffineT { a: 1.0, b: 0.05 }, DensitySpec::RadialHolder { alpha: 0.5, c0: 1.0 }],
        },
        DensitySpec::Sum { terms: vec![DensitySpec::Constant { c: 0.5 }, DensitySpec::Example1H { alpha: 0.2 }] },
    ];
    for spec in &specs {
        let f = DensityField::from_spec(spec, &bx).unwrap();
        for i in 0..=20 {
            for j in 0..=20 {
                for k in 0..=20 {
                    let x = [-1.0 + 0.1 * i as f64, -1.0 + 0.1 * j as f64];
                    let t = -10.0 + 1.0 * k as f64;
                    let v = f.eval(&x, t);
                    assert!(v >= f.lower_bound && v <= f.upper_bound, "{}: {v} at {x:?}, {t}", f.label);
                }
            }
        }
        let s = estimate_seminorm(&f, &bx, 6_000, 2, Execution::Parallel).unwrap();
        assert!(s <= f.holder_seminorm * (1.0 + 1e-9), "{}: {s} > {}", f.label, f.holder_seminorm);
    }
}

#[test]
fn unbounded_below_density_is_rejected() {
    let bx = WorkingBox::centered(1, 1.0, 10.0).unwrap();
    let err = DensityField::from_spec(&DensitySpec::AffineT { a: 1.0, b: 0.5 }, &bx).unwrap_err();
    assert!(matches!(err, Error::InvalidInput(_)));
}

#[test]
fn specs_round_trip_through_toml() {
    let spec = DensitySpec::Product {
        factors: vec![DensitySpec::Example1H { alpha: 0.5 }, DensitySpec::Constant { c: 2.0 }],
    };
    #[derive(serde::Serialize, serde::Deserialize)]
    struct Wrap {
        h: DensitySpec,
    }
    let text = toml::to_string(&Wrap { h: spec.clone() }).unwrap();
    let back: Wrap = toml::from_str(&text).unwrap();
    assert_eq!(back.h, spec);
    assert!(toml::from_str::<Wrap>("[h]\nkind = \"gaussian\"\n").is_err());
}
