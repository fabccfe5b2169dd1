//! The iteration lemma: a non-decreasing `φ` with
//! `φ(r) ≤ C₁[(r/ρ)^{α₁} + ε] φ(ρ) + C₂ ρ^{α₂}` for `r ≤ ρ` satisfies
//! `φ(r) ≤ c [(r/ρ)^{α₂} φ(ρ) + C₂ r^{α₂}]` once `ε ≤ ε₀(C₁, α₁, α₂)`.

use serde::Serialize;

use crate::error::{Error, Result};

/// Largest conclusion constant accepted as finite.
pub const CONSTANT_CAP: f64 = 1e6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IterationParams {
    pub c1: f64,
    pub c2: f64,
    pub alpha1: f64,
    pub alpha2: f64,
    pub epsilon: f64,
}

impl IterationParams {
    pub fn new(c1: f64, c2: f64, alpha1: f64, alpha2: f64, epsilon: f64) -> Result<Self> {
        if !(alpha1 > alpha2 && alpha2 > 0.0) {
            return Err(Error::InvalidInput(format!("need α₁ > α₂ > 0, got α₁ = {alpha1}, α₂ = {alpha2}")));
        }
        if !(c1 >= 0.0 && c2 >= 0.0 && epsilon >= 0.0) || ![c1, c2, epsilon].iter().all(|v| v.is_finite()) {
            return Err(Error::InvalidInput("C₁, C₂ and ε must be finite and non-negative".into()));
        }
        Ok(Self { c1, c2, alpha1, alpha2, epsilon })
    }

    /// Parameters with the given `C₁`, `ε` and the smallest `C₂` for which
    /// the hypothesis holds on `samples`.
    pub fn calibrate(samples: &[(f64, f64)], c1: f64, alpha1: f64, alpha2: f64, epsilon: f64) -> Result<Self> {
        let mut p = Self::new(c1, 0.0, alpha1, alpha2, epsilon)?;
        let s = sorted(samples)?;
        let mut c2: f64 = 0.0;
        for (j, &(rho, phi_rho)) in s.iter().enumerate() {
            for &(r, phi_r) in &s[..=j] {
                let excess = phi_r - c1 * ((r / rho).powf(alpha1) + epsilon) * phi_rho;
                c2 = c2.max(excess / rho.powf(alpha2));
            }
        }
        p.c2 = c2;
        Ok(p)
    }

    /// `τ` with `2C₁τ^{α₁} = τ^{γ'}`, `γ' = (α₁ + α₂)/2`, capped at ½.
    pub fn tau(&self) -> f64 {
        let g = 0.5 * (self.alpha1 + self.alpha2);
        if 2.0 * self.c1 <= 1.0 {
            return 0.5;
        }
        (2.0 * self.c1).powf(-1.0 / (self.alpha1 - g)).min(0.5)
    }

    /// Smallness threshold `ε₀ = τ^{α₁}`.
    pub fn epsilon_zero(&self) -> f64 {
        self.tau().powf(self.alpha1)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum IterationVerdict {
    /// Conclusion holds with the reported constant.
    Holds,
    /// No constant below the cap satisfies the conclusion.
    ConclusionFails,
    /// The hypothesis fails on the pair `(r, ρ)`.
    HypothesisFailure { r: f64, rho: f64, lhs: f64, rhs: f64 },
    /// `ε > ε₀`: the lemma does not apply.
    EpsilonTooLarge { epsilon: f64, epsilon0: f64 },
}

#[derive(Debug, Clone, Serialize)]
pub struct IterationOutcome {
    pub verdict: IterationVerdict,
    /// Smallest `c` for which the conclusion holds on every sample pair.
    pub constant: Option<f64>,
    pub epsilon0: f64,
    pub params: IterationParams,
}

impl IterationOutcome {
    pub fn holds(&self) -> bool {
        self.verdict == IterationVerdict::Holds
    }
}

fn sorted(samples: &[(f64, f64)]) -> Result<Vec<(f64, f64)>> {
    if samples.len() < 2 {
        return Err(Error::InvalidInput("the iteration check needs at least 2 samples".into()));
    }
    let mut s = samples.to_vec();
    s.sort_by(|a, b| a.0.total_cmp(&b.0));
    for w in s.windows(2) {
        if !(w[0].0 > 0.0) || !(w[0].1 >= 0.0) || w[1].1 < w[0].1 * (1.0 - 1e-12) {
            return Err(Error::InvalidInput(format!(
                "samples must be positive radii with non-negative, non-decreasing φ (at r = {}, {})",
                w[0].0, w[1].0
            )));
        }
    }
    Ok(s)
}

/// Checks the hypothesis on every sample pair `r ≤ ρ`, then finds the
/// smallest constant of the conclusion.
pub fn iteration_conclusion(params: &IterationParams, samples: &[(f64, f64)]) -> Result<IterationOutcome> {
    let s = sorted(samples)?;
    let p = params;
    let epsilon0 = p.epsilon_zero();
    let outcome = |verdict, constant| IterationOutcome { verdict, constant, epsilon0, params: *p };
    for (j, &(rho, phi_rho)) in s.iter().enumerate() {
        for &(r, phi_r) in &s[..=j] {
            let rhs = p.c1 * ((r / rho).powf(p.alpha1) + p.epsilon) * phi_rho + p.c2 * rho.powf(p.alpha2);
            if phi_r > rhs * (1.0 + 1e-12) + f64::MIN_POSITIVE {
                return Ok(outcome(IterationVerdict::HypothesisFailure { r, rho, lhs: phi_r, rhs }, None));
            }
        }
    }
    if p.epsilon > epsilon0 {
        return Ok(outcome(IterationVerdict::EpsilonTooLarge { epsilon: p.epsilon, epsilon0 }, None));
    }
    let mut c: f64 = 0.0;
    for (j, &(rho, phi_rho)) in s.iter().enumerate() {
        for &(r, phi_r) in &s[..=j] {
            if phi_r == 0.0 {
                continue;
            }
            let den = (r / rho).powf(p.alpha2) * phi_rho + p.c2 * r.powf(p.alpha2);
            c = c.max(if den > 0.0 { phi_r / den } else { f64::INFINITY });
        }
    }
    if c <= CONSTANT_CAP {
        Ok(outcome(IterationVerdict::Holds, Some(c)))
    } else {
        Ok(outcome(IterationVerdict::ConclusionFails, None))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dyadic(f: impl Fn(f64) -> f64) -> Vec<(f64, f64)> {
        (0..10).map(|k| 0.5f64.powi(k)).map(|r| (r, f(r))).collect()
    }

    #[test]
    fn saturating_sequence() {
        let (a1, a2) = (3.0, 2.0);
        let s = dyadic(|r| r.powf(a2));
        let p = IterationParams::new(1.0, 1.0, a1, a2, 0.0).unwrap();
        let out = iteration_conclusion(&p, &s).unwrap();
        assert!(out.holds());
        // φ(r)/((r/ρ)^{α₂}φ(ρ) + C₂ r^{α₂}) = 1/(1 + C₂) with equality at r = ρ
        assert!((out.constant.unwrap() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn faster_decay_passes() {
        let (a1, a2) = (3.0, 2.0);
        let s = dyadic(|r| r.powf(a1));
        let p = IterationParams::new(1.0, 0.0, a1, a2, 0.0).unwrap();
        let out = iteration_conclusion(&p, &s).unwrap();
        assert!(out.holds());
        assert!((out.constant.unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn violated_hypothesis_names_the_pair() {
        let s = dyadic(|r| r);
        let p = IterationParams::new(1.0, 0.0, 3.0, 2.0, 0.0).unwrap();
        let out = iteration_conclusion(&p, &s).unwrap();
        assert!(matches!(out.verdict, IterationVerdict::HypothesisFailure { .. }));
    }

    #[test]
    fn calibrated_c2_is_tight() {
        let s = dyadic(|r| 2.0 * r.powf(1.5));
        let p = IterationParams::calibrate(&s, 1.0, 3.0, 1.2, 0.0).unwrap();
        assert!(iteration_conclusion(&p, &s).unwrap().holds());
        let mut q = p;
        q.c2 *= 0.99;
        assert!(matches!(iteration_conclusion(&q, &s).unwrap().verdict, IterationVerdict::HypothesisFailure { .. }));
    }

    #[test]
    fn rejects_unordered_exponents() {
        assert!(IterationParams::new(1.0, 0.0, 1.0, 2.0, 0.0).is_err());
    }
}
