//! Two-term decay bounds measured on discrete fields: the smallest
//! constants for which the oscillation decay, the Caccioppoli inequality
//! and the frozen-coefficient energy decay hold on sampled radii.

use serde::Serialize;

use super::oscillation::{ball_oscillation, ball_weights, OscillationProfile};
use crate::error::{Error, Result};
use crate::grid::{polygon_disc_area, Grid};

/// Smallest `c` with `φ(r) ≤ c[(r/ρ)^e φ(ρ) + B r^e]` on all sampled
/// `r < ρ`.
pub fn decay_constant(profile: &OscillationProfile, exponent: f64, additive: f64) -> f64 {
    let s = profile.ascending();
    let mut c: f64 = 0.0;
    for j in 0..s.len() {
        for i in 0..j {
            let ((r, pr), (rho, prho)) = (s[i], s[j]);
            if pr == 0.0 {
                continue;
            }
            let den = (r / rho).powf(exponent) * prho + additive * r.powf(exponent);
            c = c.max(if den > 0.0 { pr / den } else { f64::INFINITY });
        }
    }
    c
}

/// `∫_{B_ρ(center) ∩ Ω} |Dg|²` with cells clipped to the ball.
pub fn gradient_energy_in_ball(grid: &Grid, g: &[f64], center: &[f64], rho: f64) -> f64 {
    grid.cells
        .iter()
        .map(|c| {
            let frac = match grid.dim {
                1 => {
                    let (a, b) = (grid.nodes[c.verts[0]][0], grid.nodes[c.verts[1]][0]);
                    let (a, b) = (a.min(b), a.max(b));
                    ((b.min(center[0] + rho) - a.max(center[0] - rho)).max(0.0)) / (b - a)
                }
                _ => {
                    let tri = [grid.nodes[c.verts[0]], grid.nodes[c.verts[1]], grid.nodes[c.verts[2]]];
                    let full = 0.5
                        * ((tri[1][0] - tri[0][0]) * (tri[2][1] - tri[0][1])
                            - (tri[2][0] - tri[0][0]) * (tri[1][1] - tri[0][1]))
                            .abs();
                    polygon_disc_area(&tri, [center[0], center[1]], rho) / full
                }
            };
            if frac <= 0.0 {
                return 0.0;
            }
            let d = c.gradient(g);
            frac * c.weight * (d[0] * d[0] + d[1] * d[1])
        })
        .sum()
}

#[derive(Debug, Clone, Serialize)]
pub struct CaccioppoliCheck {
    pub radii: Vec<f64>,
    /// `∫_{B_ρ} |Dg|²`.
    pub lhs: Vec<f64>,
    /// `ρ^{−2} ∫_{B_{2ρ}} |g − (g)_{2ρ}|²`.
    pub oscillation_term: Vec<f64>,
    /// `R^{2(σ−1)} ρ^{n−1+2γ}`.
    pub inhomogeneous_term: Vec<f64>,
    /// Smallest constant for which the bound holds on all radii.
    pub constant: f64,
}

/// Caccioppoli check for `g = ∂_i v`: `∫_{B_ρ}|Dg|² ≤ c[ρ^{−2}∫_{B_{2ρ}}|g −
/// (g)_{2ρ}|² + R^{2(σ−1)} ρ^{n−1+2γ}]` over `ρ_k = ρ₀ 2^{−k}`.
#[allow(clippy::too_many_arguments)]
pub fn caccioppoli_check(
    grid: &Grid,
    g: &[f64],
    center: &[f64],
    rho0: f64,
    depth: usize,
    big_r: f64,
    sigma: f64,
    gamma: f64,
) -> Result<CaccioppoliCheck> {
    let d = grid.dim as f64;
    let mut out = CaccioppoliCheck {
        radii: Vec::new(),
        lhs: Vec::new(),
        oscillation_term: Vec::new(),
        inhomogeneous_term: Vec::new(),
        constant: 0.0,
    };
    for k in 0..=depth {
        let rho = rho0 * 0.5f64.powi(k as i32);
        let w2 = ball_weights(grid, center, 2.0 * rho);
        if w2.len() < 2 * super::MIN_BALL_NODES {
            return Err(Error::InsufficientResolution { radius: 2.0 * rho, nodes: w2.len(), required: 16 });
        }
        let (_, osc) = ball_oscillation(g, &w2, 2.0, None);
        let lhs = gradient_energy_in_ball(grid, g, center, rho);
        let t1 = osc / (rho * rho);
        let t2 = big_r.powf(2.0 * (sigma - 1.0)) * rho.powf(d + 2.0 * gamma);
        out.constant = out.constant.max(lhs / (t1 + t2));
        out.radii.push(rho);
        out.lhs.push(lhs);
        out.oscillation_term.push(t1);
        out.inhomogeneous_term.push(t2);
    }
    Ok(out)
}

/// Smallest `c` with `∫_{B_r}|Dw|² ≤ c[(r/ρ)^{n−1}∫_{B_ρ}|Dw|² + R^{2(σ−1)}
/// ρ^{n−1+2γ}]` for the frozen-coefficient solution on `B_ρ` and the
/// sampled radii `r = ρ 2^{−k}`, `k = 1..=depth`.
#[allow(clippy::too_many_arguments)]
pub fn frozen_decay_constant(
    grid: &Grid,
    w: &[f64],
    center: &[f64],
    rho: f64,
    depth: usize,
    big_r: f64,
    sigma: f64,
    gamma: f64,
) -> f64 {
    let d = grid.dim as f64;
    let full = gradient_energy_in_ball(grid, w, center, rho);
    let extra = big_r.powf(2.0 * (sigma - 1.0)) * rho.powf(d + 2.0 * gamma);
    (1..=depth)
        .map(|k| {
            let r = rho * 0.5f64.powi(k as i32);
            gradient_energy_in_ball(grid, w, center, r) / ((r / rho).powf(d) * full + extra)
        })
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::oscillation_profile;

    #[test]
    fn gradient_energy_of_quadratic() {
        // g = x², |g'|² = 4x², ∫_{−ρ}^{ρ} = 8ρ³/3
        let grid = Grid::interval(0.0, 1.0, 4097).unwrap();
        let g: Vec<f64> = grid.nodes.iter().map(|x| x[0] * x[0]).collect();
        let e = gradient_energy_in_ball(&grid, &g, &[0.0], 0.5);
        assert!((e / (8.0 * 0.125 / 3.0) - 1.0).abs() < 1e-5, "{e}");
    }

    #[test]
    fn caccioppoli_constant_of_quadratic() {
        // g = x²: lhs 8ρ³/3, oscillation of g on B_2ρ = (2ρ)⁵·8/45
        let grid = Grid::interval(0.0, 1.0, 8193).unwrap();
        let g: Vec<f64> = grid.nodes.iter().map(|x| x[0] * x[0]).collect();
        let c = caccioppoli_check(&grid, &g, &[0.0], 0.25, 4, 1.0, 1.0, 1.0).unwrap();
        for k in 0..c.radii.len() {
            let rho = c.radii[k];
            let osc = (2.0 * rho).powi(5) * 8.0 / 45.0;
            assert!((c.oscillation_term[k] / (osc / (rho * rho)) - 1.0).abs() < 1e-3);
        }
        assert!(c.constant > 0.0 && c.constant.is_finite());
    }

    #[test]
    fn decay_constant_of_pure_power() {
        let grid = Grid::interval(0.0, 1.0, 4097).unwrap();
        let g: Vec<f64> = grid.nodes.iter().map(|x| x[0]).collect();
        let prof = oscillation_profile(&grid, &g, &[0.0], 0.5, 4, 2.0, "x").unwrap();
        // φ ∝ ρ³ exactly up to quadrature: with e = 3 and no additive term c ≈ 1
        let c = decay_constant(&prof, 3.0, 0.0);
        assert!((c - 1.0).abs() < 1e-3, "{c}");
    }
}
