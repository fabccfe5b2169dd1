//! Scaling laws over families of radii: multiplier growth `|λ| ≈ C R^e`
//! and comparison errors `∫_{B_R} |Du − Dv|² ≈ C R^e`.

use serde::Serialize;

use super::regression::{fit_power_law, PowerFit};
use crate::error::{Error, Result};

/// Multipliers below this magnitude mark an inactive constraint.
pub const INACTIVE_LAMBDA: f64 = 1e-6;
/// Comparison errors at or below this value count as exact zeros.
pub const ZERO_ERROR: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SeriesStatus {
    Fitted,
    /// Fewer than four points survive the exclusions; no fit.
    Excluded,
    /// Every ordinate is zero (identical problems).
    DegenerateZero,
}

#[derive(Debug, Clone, Serialize)]
pub struct ScalingSeries {
    pub label: String,
    pub abscissa: Vec<f64>,
    pub ordinate: Vec<f64>,
    pub status: SeriesStatus,
    pub fit: Option<PowerFit>,
    /// Points left out of the regression, with the reason in `note`.
    pub excluded: Vec<(f64, f64)>,
    pub note: Option<String>,
}

impl ScalingSeries {
    pub fn exponent(&self) -> Option<f64> {
        self.fit.map(|f| f.exponent)
    }

    pub fn constant(&self) -> Option<f64> {
        self.fit.map(|f| f.constant)
    }

    /// Fit of a series with the given zero threshold; all inputs kept for
    /// reporting.
    fn build(label: &str, points: &[(f64, f64)], zero: f64, reason: &str) -> Result<Self> {
        let mut keep = Vec::new();
        let mut excluded = Vec::new();
        for &(x, y) in points {
            if !(x > 0.0 && x.is_finite() && y.is_finite()) {
                return Err(Error::InvalidInput(format!("{label}: point ({x}, {y}) is not usable")));
            }
            if y.abs() <= zero {
                excluded.push((x, y));
            } else {
                keep.push((x, y.abs()));
            }
        }
        let abscissa = points.iter().map(|p| p.0).collect();
        let ordinate = points.iter().map(|p| p.1).collect();
        let (status, fit, note) = if keep.is_empty() {
            (SeriesStatus::DegenerateZero, None, Some(format!("all values {reason}")))
        } else if keep.len() < 4 {
            (
                SeriesStatus::Excluded,
                None,
                Some(format!("{} of {} values {reason}; too few left to fit", excluded.len(), points.len())),
            )
        } else {
            let (xs, ys): (Vec<f64>, Vec<f64>) = keep.into_iter().unzip();
            let note = (!excluded.is_empty()).then(|| format!("{} values {reason} were excluded", excluded.len()));
            (SeriesStatus::Fitted, Some(fit_power_law(&xs, &ys)?), note)
        };
        Ok(Self { label: label.to_string(), abscissa, ordinate, status, fit, excluded, note })
    }
}

fn distinct_count(points: &[(f64, f64)]) -> usize {
    let mut xs: Vec<f64> = points.iter().map(|p| p.0).collect();
    xs.sort_by(f64::total_cmp);
    xs.dedup_by(|a, b| (*a - *b).abs() <= 1e-12 * b.abs());
    xs.len()
}

/// Fitted exponent of `|λ|` against `R` over a dyadic family.
pub fn lambda_scaling(family: &[(f64, f64)]) -> Result<ScalingSeries> {
    if distinct_count(family) < 4 {
        return Err(Error::InvalidInput("λ scaling needs at least 4 distinct radii".into()));
    }
    let rmax = family.iter().map(|p| p.0).fold(0.0, f64::max);
    for &(r, _) in family {
        let k = (rmax / r).log2();
        if (k - k.round()).abs() > 1e-6 {
            return Err(Error::InvalidInput(format!("radius {r} is not a dyadic fraction of {rmax}")));
        }
    }
    ScalingSeries::build("|lambda|", family, INACTIVE_LAMBDA, "with inactive constraint (|λ| < 1e-6)")
}

/// Fitted exponent of `∫_{B_R} |Du − Dv|²` against `R`.
pub fn comparison_error_scaling(pairs: &[(f64, f64)]) -> Result<ScalingSeries> {
    if distinct_count(pairs) < 4 {
        return Err(Error::InvalidInput("comparison-error scaling needs at least 4 distinct radii".into()));
    }
    if pairs.iter().any(|p| p.1 < 0.0) {
        return Err(Error::InvalidInput("comparison errors must be non-negative".into()));
    }
    ScalingSeries::build("int |Du-Dv|^2", pairs, ZERO_ERROR, "are zero (Du = Dv)")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn synthetic_power_series_is_exact() {
        let s = 1.0 / 3.0;
        let pairs: Vec<(f64, f64)> = (0..5).map(|k| 0.5f64.powi(k)).map(|r| (r, r.powf(1.0 + 2.0 * s))).collect();
        let series = comparison_error_scaling(&pairs).unwrap();
        assert!((series.exponent().unwrap() - (1.0 + 2.0 * s)).abs() < 1e-12);
    }

    #[test]
    fn inactive_family_is_excluded() {
        let fam: Vec<(f64, f64)> = (0..5).map(|k| (0.5f64.powi(k), 1e-9)).collect();
        let series = lambda_scaling(&fam).unwrap();
        assert_eq!(series.status, SeriesStatus::DegenerateZero);
        assert!(series.fit.is_none());
        assert_eq!(series.excluded.len(), 5);
    }

    #[test]
    fn zero_errors_are_degenerate() {
        let pairs: Vec<(f64, f64)> = (0..4).map(|k| (0.5f64.powi(k), 0.0)).collect();
        assert_eq!(comparison_error_scaling(&pairs).unwrap().status, SeriesStatus::DegenerateZero);
    }

    #[test]
    fn non_dyadic_family_is_rejected() {
        let fam = [(1.0, 1.0), (0.5, 2.0), (0.3, 3.0), (0.125, 8.0)];
        assert!(lambda_scaling(&fam).is_err());
    }
}
