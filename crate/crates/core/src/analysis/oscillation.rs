//! Campanato mean-oscillation profiles
//! `φ(ρ) = ∫_{B_ρ(x₀) ∩ Ω} |g − (g)_ρ|^p` over dyadic radii.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid::{polygon_disc_area, Grid};

/// Smallest number of grid nodes a ball of the profile must hold.
pub const MIN_BALL_NODES: usize = 8;

#[derive(Debug, Clone, Serialize)]
pub struct OscillationProfile {
    pub center: Vec<f64>,
    /// Decreasing radii `ρ_k = ρ₀ 2^{−k}`.
    pub radii: Vec<f64>,
    pub values: Vec<f64>,
    /// Nodes inside each ball.
    pub nodes: Vec<usize>,
    pub label: String,
    pub p: f64,
    /// Dimension of the base ball (`n − 1`).
    pub dim: usize,
}

impl OscillationProfile {
    /// `(radius, value)` pairs in increasing radius order.
    pub fn ascending(&self) -> Vec<(f64, f64)> {
        self.radii.iter().copied().zip(self.values.iter().copied()).rev().collect()
    }
}

/// Quadrature weights for `B_ρ(center) ∩ Ω`: each node's dual cell
/// (half-cells in 1D, the lattice square in 2D) clipped to the ball. Nodes
/// whose clipped dual cell is empty are left out.
pub fn ball_weights(grid: &Grid, center: &[f64], rho: f64) -> Vec<(usize, f64)> {
    let mut out = Vec::new();
    match grid.dim {
        1 => {
            let (lo, hi) = (center[0] - rho, center[0] + rho);
            for i in 0..grid.num_nodes() {
                let x = grid.nodes[i][0];
                let mut w = 0.0;
                for &ci in grid.cells_of(i) {
                    let c = &grid.cells[ci];
                    let other = if c.verts[0] == i { c.verts[1] } else { c.verts[0] };
                    let y = 0.5 * (x + grid.nodes[other][0]);
                    let (a, b) = (x.min(y), x.max(y));
                    w += (b.min(hi) - a.max(lo)).max(0.0);
                }
                if w > 0.0 {
                    out.push((i, w));
                }
            }
        }
        _ => {
            let hh = 0.5 * grid.spacing;
            let full = grid.spacing * grid.spacing;
            let c = [center[0], center[1]];
            for i in 0..grid.num_nodes() {
                let [x, y] = grid.nodes[i];
                if (x - c[0]).hypot(y - c[1]) > rho + 2.0 * hh {
                    continue;
                }
                let square = [[x - hh, y - hh], [x + hh, y - hh], [x + hh, y + hh], [x - hh, y + hh]];
                let frac = polygon_disc_area(&square, c, rho) / full;
                let w = grid.node_weights[i] * frac;
                if w > 0.0 {
                    out.push((i, w));
                }
            }
        }
    }
    out
}

/// Weighted mean and `∫ |g − mean|^p` over a weighted node set; the mean
/// may be overridden to probe mean-minimality.
pub fn ball_oscillation(values: &[f64], weights: &[(usize, f64)], p: f64, mean: Option<f64>) -> (f64, f64) {
    let mass: f64 = weights.iter().map(|(_, w)| w).sum();
    // Mean taken relative to the first value, so constant fields are exact.
    let base = weights.first().map_or(0.0, |&(i, _)| values[i]);
    let m = mean.unwrap_or_else(|| base + weights.iter().map(|&(i, w)| w * (values[i] - base)).sum::<f64>() / mass);
    let osc = weights.iter().map(|&(i, w)| w * (values[i] - m).abs().powf(p)).sum();
    (m, osc)
}

/// Oscillation profile of the nodal field `g` over `B_{ρ_k}(center) ∩ Ω`
/// for `ρ_k = ρ₀ 2^{−k}`, `k = 0..=depth`.
pub fn oscillation_profile(
    grid: &Grid,
    g: &[f64],
    center: &[f64],
    rho0: f64,
    depth: usize,
    p: f64,
    label: &str,
) -> Result<OscillationProfile> {
    if g.len() != grid.num_nodes() {
        return Err(Error::InvalidInput("field length does not match the grid".into()));
    }
    if depth < 3 || !(rho0 > 0.0) || !(p >= 1.0) {
        return Err(Error::InvalidInput(format!("profile needs depth ≥ 3, ρ₀ > 0, p ≥ 1 (got {depth}, {rho0}, {p})")));
    }
    let dim = grid.dim;
    if center.len() < dim {
        return Err(Error::InvalidInput(format!("center {center:?} has fewer than {dim} coordinates")));
    }
    let offset = (0..dim).map(|k| (center[k] - grid.center[k]).powi(2)).sum::<f64>().sqrt();
    if offset > grid.radius * (1.0 + 1e-12) {
        return Err(Error::InvalidInput(format!("profile center {center:?} lies outside the grid")));
    }
    let mut radii = Vec::with_capacity(depth + 1);
    let mut values = Vec::with_capacity(depth + 1);
    let mut nodes = Vec::with_capacity(depth + 1);
    for k in 0..=depth {
        let rho = rho0 * 0.5f64.powi(k as i32);
        let w = ball_weights(grid, center, rho);
        if w.len() < MIN_BALL_NODES {
            return Err(Error::InsufficientResolution { radius: rho, nodes: w.len(), required: MIN_BALL_NODES });
        }
        let (_, osc) = ball_oscillation(g, &w, p, None);
        if !osc.is_finite() {
            return Err(Error::NumericalFailure(format!("non-finite oscillation at ρ = {rho}")));
        }
        radii.push(rho);
        values.push(osc);
        nodes.push(w.len());
    }
    Ok(OscillationProfile {
        center: center[..dim].to_vec(),
        radii,
        values,
        nodes,
        label: label.to_string(),
        p,
        dim,
    })
}
