//! Least-squares power laws `y ≈ C x^e` fitted in log–log coordinates.

use serde::Serialize;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PowerFit {
    pub exponent: f64,
    pub constant: f64,
    /// Root-mean-square residual of `log y` about the fitted line.
    pub residual: f64,
    pub points: usize,
}

impl PowerFit {
    pub fn predict(&self, x: f64) -> f64 {
        self.constant * x.powf(self.exponent)
    }
}

/// Fits `log y = log C + e log x`. Inputs must be strictly positive and
/// hold at least two distinct abscissae.
pub fn fit_power_law(x: &[f64], y: &[f64]) -> Result<PowerFit> {
    if x.len() != y.len() || x.len() < 2 {
        return Err(Error::InvalidInput(format!(
            "power-law fit needs ≥ 2 matched points, got {} and {}",
            x.len(),
            y.len()
        )));
    }
    if x.iter().chain(y).any(|v| !(*v > 0.0 && v.is_finite())) {
        return Err(Error::InvalidInput("log–log regression inputs must be finite and strictly positive".into()));
    }
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxx: f64 = lx.iter().map(|a| (a - mx).powi(2)).sum();
    if !(sxx > 1e-24 * (1.0 + mx * mx)) {
        return Err(Error::InvalidInput("degenerate regression: all abscissae are equal".into()));
    }
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let exponent = sxy / sxx;
    let intercept = my - exponent * mx;
    let ss: f64 = lx.iter().zip(&ly).map(|(a, b)| (b - intercept - exponent * a).powi(2)).sum();
    Ok(PowerFit {
        exponent,
        constant: intercept.exp(),
        residual: (ss / n).sqrt(),
        points: lx.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn recovers_pure_power() {
        let x: Vec<f64> = (0..8).map(|k| 0.5f64.powi(k)).collect();
        let y: Vec<f64> = x.iter().map(|r| 3.7 * r.powf(2.345)).collect();
        let fit = fit_power_law(&x, &y).unwrap();
        assert!((fit.exponent - 2.345).abs() < 1e-12);
        assert!((fit.constant - 3.7).abs() < 1e-11);
        assert!(fit.residual < 1e-12);
    }

    #[test]
    fn rejects_equal_abscissae_and_nonpositive_values() {
        assert!(fit_power_law(&[1.0, 1.0, 1.0], &[1.0, 2.0, 3.0]).is_err());
        assert!(fit_power_law(&[1.0, 2.0], &[1.0, 0.0]).is_err());
    }
}
