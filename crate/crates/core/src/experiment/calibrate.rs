//! Calibration suite: synthetic oracles for every measurement the
//! experiments rely on.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Value};

use super::runner::{profile_depth, Ctx};
use super::Check;
use crate::analysis::{comparison_error_scaling, fit_exponent, fit_power_law, oscillation_profile, FitOptions};
use crate::density::{DensityField, DensitySpec, WorkingBox, DEFAULT_HEIGHT_BOUND};
use crate::error::Result;
use crate::functional::{first_variation_comparison, first_variation_weighted, Discrete, Surface};
use crate::grid::{GraphFunction, Grid};
use crate::integrand::SurfaceIntegrand;
use crate::solver::Mode;

/// `(1+σ)|x|^σ sgn x`, the derivative of `|x|^{1+σ}`.
pub fn holder_derivative(x: f64, sigma: f64) -> f64 {
    (1.0 + sigma) * x.abs().powf(sigma) * x.signum()
}

/// Closed-form `∫_{−ρ}^{ρ} |g − (g)_ρ|²` for [`holder_derivative`]; the
/// mean vanishes by symmetry.
pub fn holder_derivative_oscillation(rho: f64, sigma: f64) -> f64 {
    (1.0 + sigma).powi(2) * 2.0 * rho.powf(1.0 + 2.0 * sigma) / (1.0 + 2.0 * sigma)
}

#[derive(Debug, Clone, Serialize)]
pub struct HolderCalibration {
    pub sigma: f64,
    pub implied_beta: f64,
    pub slope: f64,
    pub residual: f64,
    /// Largest relative deviation of the profile from the closed form.
    pub max_relative_error: f64,
    pub radii: Vec<f64>,
    pub values: Vec<f64>,
}

/// Campanato profile of `∂(|x|^{1+σ})` about the origin of `[−1, 1]`.
pub fn holder_calibration(sigma: f64, resolution: usize, depth: Option<usize>, fit: &FitOptions) -> Result<HolderCalibration> {
    let grid = Grid::interval(0.0, 1.0, resolution)?;
    let g: Vec<f64> = (0..grid.num_nodes()).map(|i| holder_derivative(grid.x(i)[0], sigma)).collect();
    let rho0 = 0.5;
    let depth = depth.unwrap_or_else(|| profile_depth(rho0, 2.0 / (resolution - 1) as f64));
    let prof = oscillation_profile(&grid, &g, &[0.0], rho0, depth, 2.0, &format!("holder_sigma{sigma}"))?;
    let f = fit_exponent(&prof, fit)?;
    let max_relative_error = prof
        .radii
        .iter()
        .zip(&prof.values)
        .map(|(&r, &v)| {
            let exact = holder_derivative_oscillation(r, sigma);
            (v - exact).abs() / exact
        })
        .fold(0.0, f64::max);
    Ok(HolderCalibration {
        sigma,
        implied_beta: f.implied_beta,
        slope: f.slope,
        residual: f.residual,
        max_relative_error,
        radii: prof.radii,
        values: prof.values,
    })
}

/// Largest relative error between the first variation of `mode` and central
/// differences of the discrete `E + λV`, over `instances` random problems
/// (alternating `d = 1, 2`).
pub fn gradient_check(mode: Mode, instances: usize, seed: u64) -> Result<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    for i in 0..instances {
        let dim = 1 + i % 2;
        let grid = Arc::new(if dim == 1 { Grid::interval(0.0, 1.0, 17)? } else { Grid::disc([0.0, 0.0], 1.0, 9)? });
        let bx = WorkingBox::centered(dim, 1.0, DEFAULT_HEIGHT_BOUND)?;
        let alpha = rng.random_range(0.3..0.9);
        let h = DensityField::from_spec(&DensitySpec::Example1H { alpha }, &bx)?;
        let f_spec = match i % 3 {
            0 => DensitySpec::Constant { c: rng.random_range(0.5..2.0) },
            1 => DensitySpec::AffineT { a: 1.0, b: rng.random_range(-0.05..0.05) },
            _ => DensitySpec::Product {
                factors: vec![
                    DensitySpec::AffineT { a: 1.0, b: rng.random_range(-0.05..0.05) },
                    DensitySpec::RadialHolder { alpha, c0: 1.0 },
                ],
            },
        };
        let f = DensityField::from_spec(&f_spec, &bx)?;
        let ak = SurfaceIntegrand::new(rng.random_range(0.5..5.0))?;
        let lambda = rng.random_range(-2.0..2.0);
        let mut w = GraphFunction::from_fn(grid.clone(), |_| 0.0);
        for &node in &grid.free {
            w.values[node] = rng.random_range(0.1..0.8);
        }
        let surface = match mode {
            Mode::Weighted => Surface::Weighted(&h),
            Mode::Comparison => Surface::Comparison(&ak),
        };
        let d = Discrete::new(&grid, &f, surface);
        let total = |v: &[f64]| -> Result<f64> { Ok(d.energy(v)? + lambda * d.volume(v)?) };
        let g = match mode {
            Mode::Weighted => first_variation_weighted(&w, &f, &h, lambda)?,
            Mode::Comparison => first_variation_comparison(&w, &ak, &f, lambda)?,
        };
        let scale = g.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        for &node in &grid.free {
            let step = 1e-5;
            let mut p = w.values.clone();
            p[node] += step;
            let ep = total(&p)?;
            p[node] -= 2.0 * step;
            let em = total(&p)?;
            let fd = (ep - em) / (2.0 * step);
            worst = worst.max((fd - g[node]).abs() / scale);
        }
    }
    Ok(worst)
}

pub(crate) fn run_calibration(ctx: &mut Ctx<'_>) -> Result<()> {
    let cfg = ctx.cfg;
    let c = &cfg.calibration;
    let seed = cfg.seed;

    let mut certificates = Vec::new();
    for &k in &c.k_values {
        let ak = SurfaceIntegrand::new(k)?;
        let mu = ak.sampled_min_eigenvalue();
        ctx.check(Check::at_least(format!("a_k_convexity[K{k}]"), mu, f64::MIN_POSITIVE));
        ctx.check(Check::at_least(format!("a_k_majorization[K{k}]"), ak.majorization_slack(), -1e-12));
        let mut slacks = Vec::new();
        for dim in [1, 2] {
            let s = ak.strong_convexity_slack(dim, c.pairs, seed.wrapping_add(dim as u64));
            ctx.check(Check::at_least(format!("strong_convexity[K{k}/d{dim}]"), s, 0.0));
            slacks.push(s);
        }
        certificates.push(json!({
            "k": k, "mu": mu, "certified_mu": ak.mu, "tail_coefficient": ak.tail_coefficient(),
            "majorization_slack": ak.majorization_slack(), "junction_jump": ak.junction_jump(),
            "strong_convexity_slack": slacks,
        }));
    }

    let mut holder = Vec::new();
    for &sigma in &c.sigmas {
        let cal = holder_calibration(sigma, c.resolution, Some(c.depth), &cfg.checks.fit)?;
        ctx.out.table("profile", &format!("holder_sigma{sigma}"), &cal.radii, &cal.values)?;
        ctx.check(Check::within(format!("campanato_calibration[sigma{sigma}]"), cal.implied_beta, sigma, c.beta_tolerance));
        holder.push(serde_json::to_value(&cal)?);
    }

    let grid = Grid::interval(0.0, 1.0, c.resolution)?;
    let flat = vec![3.7; grid.num_nodes()];
    let prof = oscillation_profile(&grid, &flat, &[0.0], 0.5, c.depth, 2.0, "constant")?;
    let flat_max = prof.values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    ctx.check(Check::at_most("constant_field_oscillation".to_string(), flat_max, 0.0));

    let radii: Vec<f64> = (0..8).map(|k| 0.5f64.powi(k)).collect();
    let mut regression = Vec::new();
    for e in [0.5, 1.0, 4.0 / 3.0, 2.5] {
        let y: Vec<f64> = radii.iter().map(|r| 0.7 * r.powf(e)).collect();
        let fit = fit_power_law(&radii, &y)?;
        let rel = (fit.exponent - e).abs() / e;
        ctx.check(Check::at_most(format!("regression_self_test[e{e}]"), rel, 1e-10));
        regression.push(json!({ "exponent": e, "fitted": fit.exponent, "relative_error": rel }));
    }
    let s = 1.0 / 3.0;
    let pairs: Vec<(f64, f64)> = radii.iter().map(|&r| (r, r.powf(1.0 + 2.0 * s))).collect();
    let series = comparison_error_scaling(&pairs)?;
    let e = series.exponent().unwrap_or(f64::NAN);
    ctx.check(Check::at_most("error_series_self_test".to_string(), (e - (1.0 + 2.0 * s)).abs(), 1e-10));

    let mut gradients = Vec::new();
    for (mode, name) in [(Mode::Weighted, "weighted"), (Mode::Comparison, "comparison")] {
        let err = gradient_check(mode, c.gradient_instances, seed)?;
        ctx.check(Check::at_most(format!("gradient_check[{name}]"), err, c.gradient_tolerance));
        gradients.push(json!({ "mode": name, "instances": c.gradient_instances, "max_relative_error": err }));
    }

    ctx.results.insert("a_k".into(), Value::Array(certificates));
    ctx.results.insert("campanato".into(), Value::Array(holder));
    ctx.results.insert("constant_field_oscillation".into(), json!(flat_max));
    ctx.results.insert("regression".into(), Value::Array(regression));
    ctx.results.insert("error_series_self_test".into(), json!(e));
    ctx.results.insert("gradient_checks".into(), Value::Array(gradients));
    Ok(())
}
