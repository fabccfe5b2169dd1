//! The regularity bootstrap run as an experiment: starting from the
//! initial exponent `σ₀ = α/(2n(1−α) + 2α)`, each stage checks the measured
//! decay of `∂_i u`, the comparison error and the multiplier against the
//! floors implied by `σ_j`, then sets `σ_{j+1} = min{σ_j + γ/2, α/(2−α)}`.

use serde::{Deserialize, Serialize};

use super::family::{comparison_windows, WindowMeasurement};
use super::fit::{fit_exponent, ExponentFit, FitOptions};
use super::iteration::{iteration_conclusion, IterationOutcome, IterationParams};
use super::oscillation::{oscillation_profile, OscillationProfile};
use super::scaling::{comparison_error_scaling, lambda_scaling, ScalingSeries};
use crate::density::{gamma_smallness_bound, DensityField};
use crate::error::{Error, Result};
use crate::integrand::SurfaceIntegrand;
use crate::par::Execution;
use crate::solver::{Solution, SolverConfig};

/// Optimal exponent `α/(2−α)`.
pub fn optimal_exponent(alpha: f64) -> f64 {
    alpha / (2.0 - alpha)
}

/// Initial exponent `α/(2n(1−α) + 2α)` in ambient dimension `n`.
pub fn initial_exponent(alpha: f64, n: usize) -> f64 {
    alpha / (2.0 * n as f64 * (1.0 - alpha) + 2.0 * alpha)
}

/// Largest number of stages the update rule can take:
/// `ceil(2(σ* − σ₀)/γ) + 1`.
pub fn stage_bound(alpha: f64, sigma0: f64, gamma: f64) -> usize {
    (2.0 * (optimal_exponent(alpha) - sigma0) / gamma).max(0.0).ceil() as usize + 1
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BootstrapConfig {
    /// Hölder exponent of `h`.
    pub alpha: f64,
    /// Hölder exponent of `f`; `None` selects 0.8 × the smallness bound.
    pub gamma: Option<f64>,
    /// Initial exponent; `None` selects `α/(2n(1−α) + 2α)`.
    pub sigma0: Option<f64>,
    /// Stop once an update changes `σ` by less than this.
    pub min_increment: f64,
    /// Allowed shortfall of a measured exponent below its floor.
    pub floor_tolerance: f64,
    /// Largest profile radius, as a fraction of the largest window.
    pub rho0_fraction: f64,
    pub depth: usize,
    pub fit: FitOptions,
}

impl Default for BootstrapConfig {
    fn default() -> Self {
        Self {
            alpha: 0.5,
            gamma: None,
            sigma0: None,
            min_increment: 1e-3,
            floor_tolerance: 0.1,
            rho0_fraction: 0.5,
            depth: 6,
            fit: FitOptions::default(),
        }
    }
}

impl BootstrapConfig {
    pub fn gamma(&self) -> f64 {
        self.gamma.unwrap_or(0.8 * gamma_smallness_bound(self.alpha))
    }

    pub fn sigma0(&self, n: usize) -> f64 {
        self.sigma0.unwrap_or_else(|| initial_exponent(self.alpha, n))
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::Config(format!("bootstrap α must lie in (0, 1), got {}", self.alpha)));
        }
        let g = self.gamma();
        if !(g > 0.0 && g < 1.0) {
            return Err(Error::Config(format!("bootstrap γ must lie in (0, 1), got {g}")));
        }
        if !(self.rho0_fraction > 0.0 && self.rho0_fraction <= 1.0) || self.depth < 3 {
            return Err(Error::Config("bootstrap needs ρ₀ fraction in (0, 1] and depth ≥ 3".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct BootstrapStage {
    pub index: usize,
    pub sigma: f64,
    /// Floor for the Hölder exponent of `∂_i u`: `σ_j`.
    pub beta_floor: f64,
    /// Floor for the comparison-error exponent.
    pub error_floor: f64,
    /// Floor for the multiplier exponent: `σ_j − 1`.
    pub lambda_floor: f64,
    pub iteration: IterationOutcome,
    pub passed: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct BootstrapReport {
    pub alpha: f64,
    pub gamma: f64,
    pub sigma0: f64,
    pub sigma_star: f64,
    pub stage_bound: usize,
    pub stages: Vec<BootstrapStage>,
    pub profile: OscillationProfile,
    pub final_fit: ExponentFit,
    pub error_series: ScalingSeries,
    pub lambda_series: ScalingSeries,
    pub windows: Vec<WindowMeasurement>,
    /// Set when a measured exponent falls below its floor by more than
    /// the tolerance.
    pub failure: Option<String>,
}

/// Runs the bootstrap about `center` for the weighted minimizer `u`, with
/// comparison windows of the given (dyadic) radii.
#[allow(clippy::too_many_arguments)]
pub fn regularity_bootstrap(
    u: &Solution,
    f: &DensityField,
    integrand: &SurfaceIntegrand,
    center: &[f64],
    radii: &[f64],
    axis: usize,
    cfg: &BootstrapConfig,
    solver: &SolverConfig,
    exec: Execution,
) -> Result<BootstrapReport> {
    cfg.validate()?;
    if !u.converged {
        return Err(Error::InvalidInput("bootstrap needs a converged weighted solution".into()));
    }
    let grid = &u.w.grid;
    let d = grid.dim as f64;
    let (alpha, gamma) = (cfg.alpha, cfg.gamma());
    let sigma0 = cfg.sigma0(grid.dim + 1);
    let sigma_star = optimal_exponent(alpha);
    let rmax = radii.iter().copied().fold(0.0, f64::max);

    let du = grid.nodal_derivative(&u.w.values, axis);
    let profile = oscillation_profile(grid, &du, center, cfg.rho0_fraction * rmax, cfg.depth, 2.0, "d_i u")?;
    let final_fit = fit_exponent(&profile, &cfg.fit)?;

    let windows: Vec<WindowMeasurement> = comparison_windows(u, f, integrand, center, radii, solver, exec)?
        .into_iter()
        .map(|w| w.measurement)
        .collect();
    let error_series = comparison_error_scaling(&windows.iter().map(|w| (w.radius, w.error)).collect::<Vec<_>>())?;
    let lambda_series = lambda_scaling(&windows.iter().map(|w| (w.radius, w.lambda_v)).collect::<Vec<_>>())?;
    let volume_constant = f.is_constant();

    let samples = profile.ascending();
    let mut stages = Vec::new();
    let mut failure = None;
    let mut sigma = sigma0;
    loop {
        let next = (sigma + 0.5 * gamma).min(sigma_star);
        let error_floor = if volume_constant {
            d + 2.0 * sigma_star
        } else {
            d + 2.0 * sigma_star.min((gamma + sigma) / (1.0 - gamma))
        };
        let params = IterationParams::calibrate(&samples, 1.0, d + 2.0 * (sigma + gamma), d + 2.0 * next, 0.0)?;
        let iteration = iteration_conclusion(&params, &samples)?;
        let tol = cfg.floor_tolerance;
        let mut short = Vec::new();
        if final_fit.implied_beta < sigma - tol {
            short.push(format!("∂u exponent {:.4} < σ_j = {sigma:.4}", final_fit.implied_beta));
        }
        if let Some(e) = error_series.exponent() {
            if e < error_floor - tol {
                short.push(format!("comparison-error exponent {e:.4} < {error_floor:.4}"));
            }
        }
        if let Some(e) = lambda_series.exponent() {
            if e < sigma - 1.0 - tol {
                short.push(format!("λ exponent {e:.4} < {:.4}", sigma - 1.0));
            }
        }
        let passed = short.is_empty() && iteration.holds();
        let index = stages.len();
        stages.push(BootstrapStage {
            index,
            sigma,
            beta_floor: sigma,
            error_floor,
            lambda_floor: sigma - 1.0,
            iteration,
            passed,
        });
        if !short.is_empty() {
            failure = Some(format!("stage {index}: {}", short.join("; ")));
            break;
        }
        if next - sigma < cfg.min_increment {
            break;
        }
        sigma = next;
    }
    Ok(BootstrapReport {
        alpha,
        gamma,
        sigma0,
        sigma_star,
        stage_bound: stage_bound(alpha, sigma0, gamma),
        stages,
        profile,
        final_fit,
        error_series,
        lambda_series,
        windows,
        failure,
    })
}
