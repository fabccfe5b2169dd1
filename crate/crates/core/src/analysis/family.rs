//! Window families: restrictions of a weighted minimizer `u` to balls
//! `B_R(x₀) ∩ Ω` and the comparison solutions `v` on each window.

use std::sync::Arc;

use serde::Serialize;

use crate::density::DensityField;
use crate::error::Result;
use crate::functional::{comparison_energy, euclidean_area, weighted_volume};
use crate::integrand::SurfaceIntegrand;
use crate::par::Execution;
use crate::solver::{solve_comparison, Solution, SolverConfig};

#[derive(Debug, Clone, Serialize)]
pub struct WindowMeasurement {
    pub radius: f64,
    pub nodes: usize,
    /// Multiplier of the weighted problem (shared by all windows).
    pub lambda_u: f64,
    /// Multiplier of the comparison problem on the window.
    pub lambda_v: f64,
    /// `∫_{B_R} |Du − Dv|²`.
    pub error: f64,
    pub energy_ak_u: f64,
    pub energy_ak_v: f64,
    pub area_u: f64,
    pub area_v: f64,
    pub volume_u: f64,
    pub volume_v: f64,
    pub max_gradient_u: f64,
    pub comparison_kkt: f64,
}

impl WindowMeasurement {
    /// `∫ a_K(Dv) − ∫ a_K(Du)`; non-positive up to solver tolerance.
    pub fn energy_gap(&self) -> f64 {
        self.energy_ak_v - self.energy_ak_u
    }

    pub fn volume_gap(&self) -> f64 {
        (self.volume_v - self.volume_u).abs()
    }
}

/// A window: `u` restricted to `B_R(x₀) ∩ Ω` and its comparison solution.
#[derive(Debug, Clone)]
pub struct ComparisonWindow {
    pub u: Solution,
    pub v: Solution,
    pub measurement: WindowMeasurement,
}

/// Restricts `u` to `B_R(center)`; the restriction keeps `u`'s multiplier
/// and convergence flag.
pub fn restrict_solution(u: &Solution, center: &[f64], radius: f64) -> Result<Solution> {
    let (sub, parent) = u.w.grid.restrict_to_ball(center, radius)?;
    let w = u.w.restrict(Arc::new(sub), &parent);
    Ok(Solution { w, ..u.clone() })
}

/// Solves the comparison problem on every window, independently.
pub fn comparison_windows(
    u: &Solution,
    f: &DensityField,
    integrand: &SurfaceIntegrand,
    center: &[f64],
    radii: &[f64],
    cfg: &SolverConfig,
    exec: Execution,
) -> Result<Vec<ComparisonWindow>> {
    exec.try_map(radii.len(), |k| {
        let uw = restrict_solution(u, center, radii[k])?;
        let v = solve_comparison(&uw, integrand, f, cfg)?;
        let measurement = WindowMeasurement {
            radius: radii[k],
            nodes: uw.w.grid.num_nodes(),
            lambda_u: u.lambda,
            lambda_v: v.lambda,
            error: uw.w.gradient_distance_sq(&v.w),
            energy_ak_u: comparison_energy(&uw.w, integrand),
            energy_ak_v: comparison_energy(&v.w, integrand),
            area_u: euclidean_area(&uw.w),
            area_v: euclidean_area(&v.w),
            volume_u: weighted_volume(&uw.w, f)?,
            volume_v: weighted_volume(&v.w, f)?,
            max_gradient_u: uw.w.max_gradient(),
            comparison_kkt: v.kkt_residual,
        };
        Ok(ComparisonWindow { u: uw, v, measurement })
    })
}
