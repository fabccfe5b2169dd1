//! Hölder exponents from oscillation profiles:
//! `φ(ρ) ≲ ρ^{n−1+pβ}` gives `β = (slope − (n−1))/p`.

use serde::{Deserialize, Serialize};

use super::oscillation::OscillationProfile;
use super::regression::fit_power_law;
use crate::error::{Error, Result};

/// Radii that enter a fit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum FitWindow {
    All,
    /// Balls holding at least this many nodes.
    MinNodes { nodes: usize },
    /// Radii in `[min, max]`.
    Radii { min: f64, max: f64 },
}

impl Default for FitWindow {
    fn default() -> Self {
        FitWindow::MinNodes { nodes: 64 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FitOptions {
    pub window: FitWindow,
    /// RMS log-residual above which a fit is flagged.
    pub residual_threshold: f64,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self { window: FitWindow::default(), residual_threshold: 0.05 }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ExponentFit {
    pub slope: f64,
    pub constant: f64,
    /// `(slope − (n−1))/p`, unclamped.
    pub implied_beta: f64,
    /// Whether `implied_beta` lies in `(0, 1]`.
    pub beta_in_range: bool,
    pub residual: f64,
    /// Smallest and largest radius used.
    pub window: (f64, f64),
    pub radii_used: usize,
    /// Radii dropped because `φ = 0` there.
    pub excluded_zero: Vec<f64>,
    /// Residual above the threshold: report, do not trust.
    pub flagged: bool,
}

/// Least-squares fit of `log φ` against `log ρ` over the window.
pub fn fit_exponent(profile: &OscillationProfile, opts: &FitOptions) -> Result<ExponentFit> {
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    let mut excluded_zero = Vec::new();
    for k in 0..profile.radii.len() {
        let (r, v) = (profile.radii[k], profile.values[k]);
        let inside = match opts.window {
            FitWindow::All => true,
            FitWindow::MinNodes { nodes } => profile.nodes[k] >= nodes,
            FitWindow::Radii { min, max } => r >= min * (1.0 - 1e-12) && r <= max * (1.0 + 1e-12),
        };
        if !inside {
            continue;
        }
        if v > 0.0 {
            xs.push(r);
            ys.push(v);
        } else {
            excluded_zero.push(r);
        }
    }
    if xs.len() < 4 {
        return Err(Error::InvalidInput(format!(
            "exponent fit of `{}` needs ≥ 4 positive radii in the window, found {} ({} zero)",
            profile.label,
            xs.len(),
            excluded_zero.len()
        )));
    }
    let fit = fit_power_law(&xs, &ys)?;
    let implied_beta = (fit.exponent - profile.dim as f64) / profile.p;
    let window = (xs.iter().copied().fold(f64::INFINITY, f64::min), xs.iter().copied().fold(0.0, f64::max));
    Ok(ExponentFit {
        slope: fit.exponent,
        constant: fit.constant,
        implied_beta,
        beta_in_range: implied_beta > 0.0 && implied_beta <= 1.0,
        residual: fit.residual,
        window,
        radii_used: xs.len(),
        excluded_zero,
        flagged: fit.residual > opts.residual_threshold,
    })
}

/// Exponent `e` of `w(z) ≈ A |z − z₀|^e` fitted over samples with
/// `zmin ≤ |z − z₀| ≤ zmax` and `w > 0`.
pub fn near_origin_exponent(z: &[f64], w: &[f64], z0: f64, zmin: f64, zmax: f64) -> Result<super::PowerFit> {
    let (xs, ys): (Vec<f64>, Vec<f64>) = z
        .iter()
        .zip(w)
        .map(|(&zz, &ww)| ((zz - z0).abs(), ww))
        .filter(|&(d, ww)| d >= zmin && d <= zmax && ww > 0.0)
        .unzip();
    if xs.len() < 4 {
        return Err(Error::InvalidInput(format!("near-origin fit has {} usable samples in [{zmin}, {zmax}]", xs.len())));
    }
    fit_power_law(&xs, &ys)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::oscillation_profile;
    use crate::grid::Grid;

    #[test]
    fn affine_field_gives_beta_one() {
        let grid = Grid::interval(0.0, 1.0, 4097).unwrap();
        let g: Vec<f64> = grid.nodes.iter().map(|x| 2.0 * x[0] - 1.0).collect();
        let prof = oscillation_profile(&grid, &g, &[0.1], 0.5, 5, 2.0, "affine").unwrap();
        let fit = fit_exponent(&prof, &FitOptions::default()).unwrap();
        assert!((fit.slope - 3.0).abs() < 1e-3, "{fit:?}");
        assert!((fit.implied_beta - 1.0).abs() < 1e-3);
    }

    #[test]
    fn zero_profile_cannot_be_fitted() {
        let grid = Grid::interval(0.0, 1.0, 1025).unwrap();
        let prof = oscillation_profile(&grid, &vec![1.0; 1025], &[0.0], 0.5, 4, 2.0, "c").unwrap();
        assert!(fit_exponent(&prof, &FitOptions { window: FitWindow::All, ..Default::default() }).is_err());
    }
}
