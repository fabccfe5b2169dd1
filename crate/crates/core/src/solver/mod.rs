//! Constrained minimization, the comparison problem, the 1D shooting oracle
//! and the frozen-coefficient linear problem.

mod constrained;
mod frozen;
mod shooting;

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::density::{DensityField, DEFAULT_HEIGHT_BOUND};
use crate::error::{Error, Result};
use crate::functional::{Discrete, Surface};
use crate::grid::{GraphFunction, Grid};
use crate::integrand::SurfaceIntegrand;
use crate::linalg::Banded;
use crate::roots::brent;

pub use constrained::{solve_comparison, solve_constrained};
pub use frozen::{frozen_coefficient_solve, FrozenSolution};
pub use shooting::{
    arc_oracle, shoot, shoot_example1, ArcOracle, ShootingConfig, ShootingDensity, ShootingResult, ShootingStart,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Weighted,
    Comparison,
}

/// A constrained problem: minimize the surface energy of `mode` subject to
/// `V_f(w) = m` and the Dirichlet data stored on the boundary nodes of
/// `boundary`.
#[derive(Clone)]
pub struct ProblemSpec {
    pub grid: Arc<Grid>,
    pub f: DensityField,
    pub h: DensityField,
    pub target_volume: f64,
    /// Full node vector; only the entries on Dirichlet nodes are used.
    pub boundary: Vec<f64>,
    pub integrand: Option<SurfaceIntegrand>,
    pub mode: Mode,
    /// Height bound `T`.
    pub height: f64,
}

impl ProblemSpec {
    /// Weighted problem with Dirichlet data sampled from `g`.
    pub fn weighted(
        grid: Arc<Grid>,
        f: DensityField,
        h: DensityField,
        target_volume: f64,
        g: impl Fn(&[f64]) -> f64,
    ) -> Result<Self> {
        let boundary = (0..grid.num_nodes()).map(|i| if grid.is_boundary[i] { g(grid.x(i)) } else { 0.0 }).collect();
        let spec = Self {
            grid,
            f,
            h,
            target_volume,
            boundary,
            integrand: None,
            mode: Mode::Weighted,
            height: DEFAULT_HEIGHT_BOUND,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn with_height(mut self, height: f64) -> Result<Self> {
        self.height = height;
        self.validate()?;
        Ok(self)
    }

    /// The discrete functional of this problem.
    pub fn discrete(&self) -> Discrete<'_> {
        let surface = match self.mode {
            Mode::Weighted => Surface::Weighted(&self.h),
            Mode::Comparison => Surface::Comparison(self.integrand.as_ref().expect("comparison mode needs a_K")),
        };
        Discrete::new(&self.grid, &self.f, surface)
    }

    /// Checks data consistency and that `m` is attainable by
    /// `interpolant + c·bubble` with `|w| ≤ T`.
    pub fn validate(&self) -> Result<()> {
        if self.boundary.len() != self.grid.num_nodes() {
            return Err(Error::InvalidInput("boundary vector has the wrong length".into()));
        }
        if !self.target_volume.is_finite() || !(self.height > 0.0) {
            return Err(Error::InvalidInput("target volume and height bound must be finite and positive".into()));
        }
        if self.mode == Mode::Comparison && self.integrand.is_none() {
            return Err(Error::InvalidInput("comparison mode needs a truncated integrand".into()));
        }
        if self.grid.num_free() == 0 {
            return Err(Error::InvalidInput("grid has no free nodes".into()));
        }
        let (lo, hi) = self.shift_range()?;
        let d = self.discrete();
        let base = self.interpolant()?;
        let bubble = self.bubble();
        let vol = |c: f64| d.volume(&shifted(&base, &bubble, c));
        let (vlo, vhi) = (vol(lo)?, vol(hi)?);
        if !(vlo <= self.target_volume && self.target_volume <= vhi) {
            return Err(Error::InvalidInput(format!(
                "target volume {} is not attainable within |w| ≤ {} (admissible range [{vlo}, {vhi}])",
                self.target_volume, self.height
            )));
        }
        Ok(())
    }

    fn shift_range(&self) -> Result<(f64, f64)> {
        let base = self.interpolant()?;
        let top = base.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let room = self.height - top;
        if !(room > 0.0) {
            return Err(Error::InvalidInput(format!(
                "boundary data reaches the height bound T = {}",
                self.height
            )));
        }
        Ok((-room, room))
    }

    /// Discrete harmonic extension of the Dirichlet data.
    pub fn interpolant(&self) -> Result<Vec<f64>> {
        harmonic_extension(&self.grid, &self.boundary)
    }

    /// `max(0, 1 − |x − c|²/R²)` with `c`, `R` the grid's center and radius;
    /// zero on Dirichlet nodes.
    pub fn bubble(&self) -> Vec<f64> {
        let g = &self.grid;
        (0..g.num_nodes())
            .map(|i| {
                if g.is_boundary[i] {
                    0.0
                } else {
                    let r = g.distance(i, &g.center[..g.dim]) / g.radius;
                    (1.0 - r * r).max(0.0)
                }
            })
            .collect()
    }

    /// Initial iterate: interpolant shifted by the bubble multiple that
    /// matches the target volume.
    pub fn initial_iterate(&self) -> Result<Vec<f64>> {
        let (lo, hi) = self.shift_range()?;
        let d = self.discrete();
        let base = self.interpolant()?;
        let bubble = self.bubble();
        let m = self.target_volume;
        let mut failure = None;
        let c = brent(
            |c| match d.volume(&shifted(&base, &bubble, c)) {
                Ok(v) => v - m,
                Err(e) => {
                    failure.get_or_insert(e);
                    f64::NAN
                }
            },
            lo,
            hi,
            1e-14,
            200,
        );
        if let Some(e) = failure {
            return Err(e);
        }
        Ok(shifted(&base, &bubble, c?))
    }
}

fn shifted(base: &[f64], bubble: &[f64], c: f64) -> Vec<f64> {
    base.iter().zip(bubble).map(|(b, p)| b + c * p).collect()
}

/// Solves the discrete Laplace problem with the Dirichlet entries of
/// `boundary`.
pub fn harmonic_extension(grid: &Grid, boundary: &[f64]) -> Result<Vec<f64>> {
    let n = grid.num_free();
    let mut k = Banded::zeros(n, grid.free_bandwidth());
    let mut rhs = vec![0.0; n];
    for c in &grid.cells {
        for a in 0..c.nv {
            let Some(p) = grid.free_index(c.verts[a]) else { continue };
            for b in 0..c.nv {
                let v = c.weight * (c.grad[a][0] * c.grad[b][0] + c.grad[a][1] * c.grad[b][1]);
                match grid.free_index(c.verts[b]) {
                    Some(q) => k.add(p, q, v),
                    None => rhs[p] -= v * boundary[c.verts[b]],
                }
            }
        }
    }
    let x = k.cholesky()?.solve(&rhs);
    let mut out: Vec<f64> = (0..grid.num_nodes()).map(|i| if grid.is_boundary[i] { boundary[i] } else { 0.0 }).collect();
    for (p, &i) in grid.free.iter().enumerate() {
        out[i] = x[p];
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverConfig {
    pub tol_kkt: f64,
    pub tol_vol: f64,
    pub tol_energy: f64,
    pub max_outer: usize,
    pub max_inner: usize,
    /// Initial penalty, relative to `1 / |B_R|`.
    pub penalty: f64,
    pub penalty_growth: f64,
    pub initial_lambda: f64,
    /// Largest radius of the acceptance families.
    pub r0: f64,
    /// Radius below which the λ bound is expected to hold; `None` until an
    /// experiment detects a violation.
    pub r_star: Option<f64>,
    /// Height bound `T`.
    pub height: f64,
    /// Armijo sufficient-decrease constant.
    pub armijo: f64,
    /// Backtracking factor of the line search.
    pub backtrack: f64,
    /// Maximum number of full KKT Newton steps in the final polish.
    pub max_polish: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            tol_kkt: 1e-8,
            tol_vol: 1e-10,
            tol_energy: 1e-8,
            max_outer: 40,
            max_inner: 60,
            penalty: 10.0,
            penalty_growth: 10.0,
            initial_lambda: 0.0,
            r0: 1.0,
            r_star: None,
            height: DEFAULT_HEIGHT_BOUND,
            armijo: 1e-4,
            backtrack: 0.5,
            max_polish: 30,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = [self.tol_kkt, self.tol_vol, self.tol_energy, self.penalty, self.r0, self.height, self.armijo];
        if positive.iter().any(|v| !(*v > 0.0)) {
            return Err(Error::Config("solver tolerances, penalty, R0 and T must be positive".into()));
        }
        if !(self.penalty_growth > 1.0) {
            return Err(Error::Config("penalty growth factor must exceed 1".into()));
        }
        if !(self.backtrack > 0.0 && self.backtrack < 1.0) {
            return Err(Error::Config("backtracking factor must lie in (0, 1)".into()));
        }
        if self.max_outer == 0 || self.max_inner == 0 {
            return Err(Error::Config("iteration limits must be positive".into()));
        }
        Ok(())
    }
}

/// Result of a constrained solve.
#[derive(Debug, Clone)]
pub struct Solution {
    pub w: GraphFunction,
    pub lambda: f64,
    pub kkt_residual: f64,
    /// `V(w) − m`.
    pub volume_mismatch: f64,
    pub iterations: usize,
    pub converged: bool,
    pub mode: Mode,
    /// Surface energy of `w` in the solved mode.
    pub energy: f64,
}

impl Solution {
    /// Compact record for run summaries.
    pub fn summary(&self) -> SolutionSummary {
        SolutionSummary {
            mode: self.mode,
            nodes: self.w.grid.num_nodes(),
            lambda: self.lambda,
            kkt_residual: self.kkt_residual,
            volume_mismatch: self.volume_mismatch,
            iterations: self.iterations,
            converged: self.converged,
            energy: self.energy,
            max_gradient: self.w.max_gradient(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SolutionSummary {
    pub mode: Mode,
    pub nodes: usize,
    pub lambda: f64,
    pub kkt_residual: f64,
    pub volume_mismatch: f64,
    pub iterations: usize,
    pub converged: bool,
    pub energy: f64,
    pub max_gradient: f64,
}
