//! Linear constant-coefficient problem for a derivative of a comparison
//! solution, with coefficients frozen at the ball averages:
//!
//! ```text
//! −div(A₀ Dw) = −λ ∂_i (f(x', v) − f₀)  in B_ρ(x₀'),   w = ∂_i v on ∂B_ρ(x₀'),
//! ```
//!
//! with `A₀ = D²a_K((Dv)_{B_ρ})` and `f₀ = f(x₀', (v)_{B_ρ})`, in the weak
//! form `∫ A₀ Dw·Dφ = λ ∫ (f(x', v) − f₀) ∂_i φ`.

use std::sync::Arc;

use crate::density::DensityField;
use crate::error::{Error, Result};
use crate::grid::GraphFunction;
use crate::integrand::SurfaceIntegrand;
use crate::linalg::Banded;

use super::Solution;

#[derive(Debug, Clone)]
pub struct FrozenSolution {
    /// Solution on the ball sub-grid.
    pub w: GraphFunction,
    /// Boundary data `∂_i v` on the same sub-grid, extended by the nodal
    /// derivative to interior nodes (for comparisons).
    pub derivative: GraphFunction,
    /// Parent-grid index of every sub-grid node.
    pub parent: Vec<usize>,
    pub a0: [[f64; 2]; 2],
    pub f0: f64,
}

/// Solves the frozen-coefficient problem on `B_ρ(center)` for axis `axis`.
/// The ball must lie in `B_{R/4}` of the solution's grid.
pub fn frozen_coefficient_solve(
    v: &Solution,
    integrand: &SurfaceIntegrand,
    f: &DensityField,
    center: &[f64],
    rho: f64,
    axis: usize,
) -> Result<FrozenSolution> {
    let grid = &v.w.grid;
    if axis >= grid.dim || center.len() < grid.dim {
        return Err(Error::InvalidInput(format!("axis {axis} / center {center:?} do not fit a {}-d grid", grid.dim)));
    }
    let offset = (0..grid.dim).map(|k| (center[k] - grid.center[k]).powi(2)).sum::<f64>().sqrt();
    if offset + rho > 0.25 * grid.radius * (1.0 + 1e-12) {
        return Err(Error::InvalidInput(format!(
            "B_ρ(x₀) with ρ = {rho} must lie in B_(R/4), R = {}",
            grid.radius
        )));
    }
    let (sub, parent) = grid.restrict_to_ball(center, rho)?;
    let sub = Arc::new(sub);
    let vs: Vec<f64> = parent.iter().map(|&p| v.w.values[p]).collect();
    let dv_parent = grid.nodal_derivative(&v.w.values, axis);
    let dv: Vec<f64> = parent.iter().map(|&p| dv_parent[p]).collect();

    // Ball averages of Dv (cellwise) and v (lumped).
    let (mut gbar, mut wsum) = ([0.0; 2], 0.0);
    for c in &sub.cells {
        let g = c.gradient(&vs);
        gbar[0] += c.weight * g[0];
        gbar[1] += c.weight * g[1];
        wsum += c.weight;
    }
    gbar = [gbar[0] / wsum, gbar[1] / wsum];
    let vbar = vs.iter().zip(&sub.node_weights).map(|(a, b)| a * b).sum::<f64>() / sub.node_weights.iter().sum::<f64>();
    let a0 = integrand.hessian(gbar);
    let f0 = f.checked_eval(&center[..grid.dim], vbar)?;

    let n = sub.num_free();
    let mut k = Banded::zeros(n, sub.free_bandwidth());
    let mut rhs = vec![0.0; n];
    for c in &sub.cells {
        let src = v.lambda * (f.checked_eval(&c.centroid[..grid.dim], c.mean(&vs))? - f0);
        for a in 0..c.nv {
            let Some(p) = sub.free_index(c.verts[a]) else { continue };
            rhs[p] += c.weight * src * c.grad[a][axis];
            let ag = [
                a0[0][0] * c.grad[a][0] + a0[0][1] * c.grad[a][1],
                a0[1][0] * c.grad[a][0] + a0[1][1] * c.grad[a][1],
            ];
            for b in 0..c.nv {
                let val = c.weight * (ag[0] * c.grad[b][0] + ag[1] * c.grad[b][1]);
                match sub.free_index(c.verts[b]) {
                    Some(q) => k.add(p, q, val),
                    None => rhs[p] -= val * dv[c.verts[b]],
                }
            }
        }
    }
    let x = k
        .cholesky()
        .map_err(|_| Error::NumericalFailure("frozen-coefficient system is singular".into()))?
        .solve(&rhs);
    let mut w = dv.clone();
    for (p, &i) in sub.free.iter().enumerate() {
        w[i] = x[p];
    }
    Ok(FrozenSolution {
        w: GraphFunction::new(sub.clone(), w)?,
        derivative: GraphFunction::new(sub, dv)?,
        parent,
        a0,
        f0,
    })
}
