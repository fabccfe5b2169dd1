use std::sync::Arc;

use isodensity::analysis::{ball_oscillation, ball_weights, fit_power_law, oscillation_profile};
use isodensity::density::{nested_volume_integrand, DensityField, DensitySpec, WorkingBox};
use isodensity::experiment::gradient_check;
use isodensity::functional::{comparison_energy, euclidean_area, weighted_perimeter};
use isodensity::grid::{GraphFunction, Grid};
use isodensity::integrand::{area, SurfaceIntegrand};
use isodensity::solver::Mode;
use proptest::prelude::*;

fn catalog() -> impl Strategy<Value = DensitySpec> {
    prop_oneof![
        (0.1f64..3.0).prop_map(|c| DensitySpec::Constant { c }),
        (0.05f64..0.99).prop_map(|alpha| DensitySpec::Example1H { alpha }),
        (0.05f64..0.99).prop_map(|alpha| DensitySpec::Example1Reciprocal { alpha }),
        (0.05f64..1.0, 0.1f64..2.0).prop_map(|(alpha, c0)| DensitySpec::RadialHolder { alpha, c0 }),
        (0.5f64..2.0, -0.04f64..0.04).prop_map(|(a, b)| DensitySpec::AffineT { a, b }),
    ]
}

/// A rough test field: a sum of Hölder cusps and a smooth term.
fn field(grid: &Grid, cusps: &[(f64, f64, f64)], smooth: f64) -> Vec<f64> {
    grid.nodes
        .iter()
        .map(|x| {
            let base = smooth * (3.0 * x[0]).sin() + 0.3 * x[1];
            cusps.iter().fold(base, |acc, &(c, s, a)| acc + a * (x[0] - c).abs().powf(s))
        })
        .collect()
}

fn cusps() -> impl Strategy<Value = Vec<(f64, f64, f64)>> {
    prop::collection::vec((-0.5f64..0.5, 0.1f64..1.5, -2.0f64..2.0), 1..4)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn densities_stay_within_their_bounds(
        spec in catalog(),
        pts in prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0, -10.0f64..10.0), 50),
    ) {
        let bx = WorkingBox::centered(2, 1.0, 10.0).unwrap();
        let f = DensityField::from_spec(&spec, &bx).unwrap();
        for (x, y, t) in pts {
            let v = f.eval(&[x, y], t);
            prop_assert!(v >= f.lower_bound && v <= f.upper_bound, "{}: {v}", f.label);
        }
    }

    #[test]
    fn sampled_pairs_respect_the_seminorm(
        spec in catalog(),
        pairs in prop::collection::vec(((-1.0f64..1.0, -1.0f64..1.0, -10.0f64..10.0), (-1.0f64..1.0, -1.0f64..1.0, -10.0f64..10.0)), 50),
    ) {
        let bx = WorkingBox::centered(2, 1.0, 10.0).unwrap();
        let f = DensityField::from_spec(&spec, &bx).unwrap();
        for ((x1, y1, t1), (x2, y2, t2)) in pairs {
            let d = ((x1 - x2).powi(2) + (y1 - y2).powi(2) + (t1 - t2).powi(2)).sqrt();
            if d == 0.0 { continue; }
            let q = (f.eval(&[x1, y1], t1) - f.eval(&[x2, y2], t2)).abs() / d.powf(f.holder_exponent);
            prop_assert!(q <= f.holder_seminorm * (1.0 + 1e-9) + 1e-12, "{}: {q} > {}", f.label, f.holder_seminorm);
        }
    }

    #[test]
    fn nested_volume_is_increasing_and_lipschitz_below(
        spec in catalog(),
        x in -1.0f64..1.0,
        w1 in -9.0f64..9.0,
        dw in 1e-3f64..1.0,
    ) {
        let bx = WorkingBox::centered(1, 1.0, 10.0).unwrap();
        let f = DensityField::from_spec(&spec, &bx).unwrap();
        let v1 = nested_volume_integrand(&f, &[x], w1).unwrap();
        let v2 = nested_volume_integrand(&f, &[x], w1 + dw).unwrap();
        prop_assert!(v2 - v1 >= dw * f.lower_bound * (1.0 - 1e-9), "{}: {} < {}", f.label, v2 - v1, dw * f.lower_bound);
    }

    #[test]
    fn nested_volume_of_constant_is_linear(c in 0.1f64..5.0, w in -10.0f64..10.0) {
        let f = DensityField::custom("c", move |_, _| c, 1.0, 0.0, (c, c));
        let v = nested_volume_integrand(&f, &[0.0], w).unwrap();
        prop_assert!((v - c * w).abs() <= 1e-10 * (c * w).abs().max(1e-300));
    }

    #[test]
    fn truncated_integrand_majorizes_area(k in 0.2f64..6.0, r in 0.0f64..1.0, theta in 0.0f64..6.3) {
        let ak = SurfaceIntegrand::new(k).unwrap();
        let rr = 4.0 * k * r;
        let z = [rr * theta.cos(), rr * theta.sin()];
        prop_assert!(ak.value(z) >= area(z) - 1e-12 * area(z));
    }

    #[test]
    fn truncated_integrand_is_strongly_convex(
        k in 0.2f64..6.0,
        z1 in (-1.0f64..1.0, -1.0f64..1.0),
        z2 in (-1.0f64..1.0, -1.0f64..1.0),
    ) {
        let ak = SurfaceIntegrand::new(k).unwrap();
        let s = 4.0 * k;
        let (a, b) = ([s * z1.0, s * z1.1], [s * z2.0, s * z2.1]);
        let g = ak.gradient(a);
        let dz = [b[0] - a[0], b[1] - a[1]];
        let gap = ak.value(b) - ak.value(a) - g[0] * dz[0] - g[1] * dz[1] - 0.5 * ak.mu * (dz[0] * dz[0] + dz[1] * dz[1]);
        prop_assert!(gap >= -1e-12 * (1.0 + ak.value(b).abs()), "gap {gap}");
    }

    #[test]
    fn comparison_energy_equals_area_below_k(
        coeffs in prop::collection::vec(-0.5f64..0.5, 4),
        k in 1.0f64..4.0,
    ) {
        let grid = Arc::new(Grid::disc([0.0, 0.0], 1.0, 17).unwrap());
        let w = GraphFunction::from_fn(grid, |x| coeffs[0] * x[0] + coeffs[1] * x[1] + coeffs[2] * x[0] * x[1] + coeffs[3] * x[0] * x[0]);
        prop_assume!(w.max_gradient() <= k);
        let ak = SurfaceIntegrand::new(k).unwrap();
        prop_assert_eq!(comparison_energy(&w, &ak), euclidean_area(&w));
    }

    #[test]
    fn weighted_perimeter_dominates_scaled_area(spec in catalog(), amp in -3.0f64..3.0) {
        let bx = WorkingBox::centered(1, 1.0, 10.0).unwrap();
        let h = DensityField::from_spec(&spec, &bx).unwrap();
        let grid = Arc::new(Grid::interval(0.0, 1.0, 65).unwrap());
        let w = GraphFunction::from_fn(grid, |x| amp * (1.0 - x[0] * x[0]));
        let p = weighted_perimeter(&w, &h).unwrap();
        prop_assert!(p >= h.lower_bound * euclidean_area(&w) * (1.0 - 1e-12));
        prop_assert!(p <= h.upper_bound * euclidean_area(&w) * (1.0 + 1e-12));
    }

    #[test]
    fn oscillation_is_monotone_in_the_radius(
        cs in cusps(),
        smooth in -1.0f64..1.0,
        center in -0.2f64..0.2,
        disc in any::<bool>(),
    ) {
        let grid = if disc { Grid::disc([0.0, 0.0], 1.0, 129).unwrap() } else { Grid::interval(0.0, 1.0, 2049).unwrap() };
        let g = field(&grid, &cs, smooth);
        let prof = oscillation_profile(&grid, &g, &[center, 0.0], 0.5, 3, 2.0, "g").unwrap();
        for k in 1..prof.values.len() {
            prop_assert!(prof.values[k] >= 0.0 && prof.values[k].is_finite());
            prop_assert!(prof.values[k] <= prof.values[k - 1] * (1.0 + 1e-12) + 1e-15, "{:?}", prof.values);
        }
    }

    #[test]
    fn the_mean_minimizes_the_quadratic_oscillation(
        cs in cusps(),
        smooth in -1.0f64..1.0,
        rho in 0.05f64..0.5,
        disc in any::<bool>(),
    ) {
        let grid = if disc { Grid::disc([0.0, 0.0], 1.0, 65).unwrap() } else { Grid::interval(0.0, 1.0, 1025).unwrap() };
        let g = field(&grid, &cs, smooth);
        let w = ball_weights(&grid, &[0.1, -0.1], rho);
        let (mean, osc) = ball_oscillation(&g, &w, 2.0, None);
        for shift in [grid.spacing, -grid.spacing] {
            let (_, moved) = ball_oscillation(&g, &w, 2.0, Some(mean + shift));
            prop_assert!(moved > osc, "{moved} ≤ {osc}");
        }
    }

    #[test]
    fn regression_recovers_pure_powers(e in -3.0f64..5.0, c in 1e-3f64..1e3, base in 0.05f64..0.9, n in 4usize..12) {
        let x: Vec<f64> = (0..n).map(|k| base.powi(k as i32)).collect();
        let y: Vec<f64> = x.iter().map(|r| c * r.powf(e)).collect();
        let fit = fit_power_law(&x, &y).unwrap();
        prop_assert!((fit.exponent - e).abs() <= 1e-10 * e.abs().max(1.0), "{} vs {e}", fit.exponent);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn first_variations_are_consistent(seed in any::<u64>()) {
        for mode in [Mode::Weighted, Mode::Comparison] {
            let err = gradient_check(mode, 4, seed).unwrap();
            prop_assert!(err < 1e-6, "{mode:?}: {err}");
        }
    }
}
