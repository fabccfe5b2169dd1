//! The area integrand `a(z) = √(1 + |z|²)` and its strongly convex
//! truncation `a_K`.
//!
//! `a_K` is radial, `a_K(z) = g(|z|)`, with `g(r) = √(1 + r²)` for `r ≤ K`,
//! `g(r) = c_K (1 + r²)` for `r ≥ 2K`, and a quintic Hermite bridge on
//! `(K, 2K)` matching value, first and second derivatives at both ends.
//! `c_K` is the smallest value (to bisection tolerance) for which the bridge
//! is convex with curvature at least half of `a''(K)`, stays above `a`, and
//! has `g'(r)/r` bounded below; the ellipticity constant `μ` is then
//! certified as the minimum Hessian eigenvalue over a dense radial sample.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};

/// Radial samples used to certify the bridge.
const CERTIFY_SAMPLES: usize = 20_001;
/// Safety factor applied to the sampled minimum eigenvalue.
const MU_SAFETY: f64 = 0.999;

/// Value and derivatives of the untruncated area integrand.
#[inline]
pub fn area(z: [f64; 2]) -> f64 {
    (1.0 + z[0] * z[0] + z[1] * z[1]).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SurfaceIntegrand {
    pub k: f64,
    pub c_k: f64,
    pub mu: f64,
    /// Quintic bridge coefficients in `s = (r - K)/K ∈ [0, 1]`.
    #[serde(skip)]
    bridge: [f64; 6],
}

/// `(g, g', g'')` of the area integrand in the radial variable.
#[inline]
fn area_radial(r: f64) -> [f64; 3] {
    let q = 1.0 + r * r;
    let s = q.sqrt();
    [s, r / s, 1.0 / (q * s)]
}

fn quintic_hermite(k: f64, c: f64) -> [f64; 6] {
    let l = k;
    let [p0, d0, s0] = area_radial(k);
    let r1 = 2.0 * k;
    let (p1, d1, s1) = (c * (1.0 + r1 * r1), 2.0 * c * r1, 2.0 * c);
    // Derivatives with respect to s carry powers of the length L.
    let (d0, s0, d1, s1) = (d0 * l, s0 * l * l, d1 * l, s1 * l * l);
    let a0 = p0;
    let a1 = d0;
    let a2 = 0.5 * s0;
    // Remaining coefficients solve the end conditions at s = 1.
    let e0 = p1 - (a0 + a1 + a2);
    let e1 = d1 - (a1 + 2.0 * a2);
    let e2 = s1 - 2.0 * a2;
    let a3 = 10.0 * e0 - 4.0 * e1 + 0.5 * e2;
    let a4 = -15.0 * e0 + 7.0 * e1 - e2;
    let a5 = 6.0 * e0 - 3.0 * e1 + 0.5 * e2;
    [a0, a1, a2, a3, a4, a5]
}

fn eval_bridge(c: &[f64; 6], k: f64, r: f64) -> [f64; 3] {
    let s = (r - k) / k;
    let p = c[0] + s * (c[1] + s * (c[2] + s * (c[3] + s * (c[4] + s * c[5]))));
    let dp = c[1] + s * (2.0 * c[2] + s * (3.0 * c[3] + s * (4.0 * c[4] + s * 5.0 * c[5])));
    let ddp = 2.0 * c[2] + s * (6.0 * c[3] + s * (12.0 * c[4] + s * 20.0 * c[5]));
    [p, dp / k, ddp / (k * k)]
}

/// Minimum over the bridge of `(g'' - floor, g - a, g'/r - floor)`.
fn bridge_slack(coeffs: &[f64; 6], k: f64, floor: f64) -> f64 {
    let mut slack = f64::INFINITY;
    let n = 2000;
    for i in 0..=n {
        let r = k * (1.0 + i as f64 / n as f64);
        let [g, d, dd] = eval_bridge(coeffs, k, r);
        slack = slack.min(dd - floor).min(g - area_radial(r)[0]).min(d / r - floor);
    }
    slack
}

impl SurfaceIntegrand {
    /// Builds `a_K`, choosing `c_K` and certifying `μ`.
    pub fn new(k: f64) -> Result<Self> {
        if !(k > 0.0 && k.is_finite()) {
            return Err(Error::InvalidInput(format!("truncation level K must be positive, got {k}")));
        }
        let floor = 0.5 * area_radial(k)[2];
        // Quadratic tail must dominate a: c (1 + r²) ≥ √(1 + r²) for r ≥ 2K.
        let c_min = 1.0 / (1.0 + 4.0 * k * k).sqrt();
        let feasible = |c: f64| c >= c_min && 2.0 * c >= floor && bridge_slack(&quintic_hermite(k, c), k, floor) >= 0.0;
        // Scan upward for the first feasible value, then bisect.
        let mut lo = c_min;
        let mut hi = None;
        let mut c = c_min;
        for _ in 0..400 {
            if feasible(c) {
                hi = Some(c);
                break;
            }
            lo = c;
            c *= 1.05;
        }
        let mut hi = hi.ok_or_else(|| Error::NumericalFailure(format!("no convex bridge found for K = {k}")))?;
        if hi > lo {
            for _ in 0..60 {
                let mid = 0.5 * (lo + hi);
                if feasible(mid) {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
        }
        let mut out = Self { k, c_k: hi, mu: 0.0, bridge: quintic_hermite(k, hi) };
        out.mu = MU_SAFETY * out.sampled_min_eigenvalue();
        if !(out.mu > 0.0) {
            return Err(Error::NumericalFailure(format!("a_K is not strongly convex for K = {k}")));
        }
        Ok(out)
    }

    /// The bridge's quadratic-tail coefficient `c_K`.
    pub fn tail_coefficient(&self) -> f64 {
        self.c_k
    }

    /// `(g, g', g'/r, g'')` in the radial variable.
    #[inline]
    pub fn radial(&self, r: f64) -> [f64; 4] {
        if r <= self.k {
            let q = 1.0 + r * r;
            let s = q.sqrt();
            [s, r / s, 1.0 / s, 1.0 / (q * s)]
        } else if r >= 2.0 * self.k {
            let c = self.c_k;
            [c * (1.0 + r * r), 2.0 * c * r, 2.0 * c, 2.0 * c]
        } else {
            let [g, d, dd] = eval_bridge(&self.bridge, self.k, r);
            [g, d, d / r, dd]
        }
    }

    #[inline]
    pub fn value(&self, z: [f64; 2]) -> f64 {
        let r2 = z[0] * z[0] + z[1] * z[1];
        // Evaluate a itself below K so that ∫ a_K(Dw) and ∫ a(Dw) agree
        // bit for bit there.
        if r2 <= self.k * self.k {
            return area(z);
        }
        self.radial(r2.sqrt())[0]
    }

    #[inline]
    pub fn gradient(&self, z: [f64; 2]) -> [f64; 2] {
        let r = (z[0] * z[0] + z[1] * z[1]).sqrt();
        let [_, _, d_over_r, _] = self.radial(r);
        [d_over_r * z[0], d_over_r * z[1]]
    }

    /// Hessian `g'' ẑẑᵀ + (g'/r)(I − ẑẑᵀ)`.
    #[inline]
    pub fn hessian(&self, z: [f64; 2]) -> [[f64; 2]; 2] {
        let r = (z[0] * z[0] + z[1] * z[1]).sqrt();
        let [_, _, d_over_r, dd] = self.radial(r);
        if r == 0.0 {
            return [[dd, 0.0], [0.0, dd]];
        }
        let u = [z[0] / r, z[1] / r];
        let mut h = [[0.0; 2]; 2];
        for i in 0..2 {
            for j in 0..2 {
                let id = if i == j { 1.0 } else { 0.0 };
                h[i][j] = dd * u[i] * u[j] + d_over_r * (id - u[i] * u[j]);
            }
        }
        h
    }

    /// Minimum of `min(g'', g'/r)` over `r ∈ [0, 4K]`.
    pub fn sampled_min_eigenvalue(&self) -> f64 {
        let n = CERTIFY_SAMPLES;
        (0..n)
            .map(|i| {
                let r = 4.0 * self.k * i as f64 / (n - 1) as f64;
                let [_, _, d_over_r, dd] = self.radial(r);
                dd.min(d_over_r)
            })
            .fold(f64::INFINITY, f64::min)
    }

    /// Minimum of `a_K − a` over `r ∈ [0, 4K]` (non-negative when the
    /// majorization holds).
    pub fn majorization_slack(&self) -> f64 {
        let n = CERTIFY_SAMPLES;
        (0..n)
            .map(|i| {
                let r = 4.0 * self.k * i as f64 / (n - 1) as f64;
                self.radial(r)[0] - area_radial(r)[0]
            })
            .fold(f64::INFINITY, f64::min)
    }

    /// Largest jump of `(g, g', g'')` across `r = K` and `r = 2K`.
    pub fn junction_jump(&self) -> f64 {
        let mut jump: f64 = 0.0;
        for r in [self.k, 2.0 * self.k] {
            let eps = 1e-12 * r;
            let a = self.radial(r - eps);
            let b = self.radial(r + eps);
            for (i, j) in [(0, 0), (1, 1), (3, 3)] {
                jump = jump.max((a[i] - b[j]).abs());
            }
        }
        jump
    }

    /// Minimum over random pairs of
    /// `a_K(z₂) − a_K(z₁) − D a_K(z₁)·(z₂ − z₁) − (μ/2)|z₂ − z₁|²`
    /// with `|z| ≤ 4K` in `dim` dimensions.
    pub fn strong_convexity_slack(&self, dim: usize, pairs: usize, seed: u64) -> f64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let bound = 4.0 * self.k;
        let draw = |rng: &mut ChaCha8Rng| {
            let mut z = [0.0; 2];
            for c in z.iter_mut().take(dim) {
                *c = rng.random_range(-bound..bound);
            }
            z
        };
        let mut slack = f64::INFINITY;
        for _ in 0..pairs {
            let z1 = draw(&mut rng);
            let z2 = draw(&mut rng);
            let g = self.gradient(z1);
            let dz = [z2[0] - z1[0], z2[1] - z1[1]];
            let lin = g[0] * dz[0] + g[1] * dz[1];
            let q = 0.5 * self.mu * (dz[0] * dz[0] + dz[1] * dz[1]);
            let gap = self.value(z2) - self.value(z1) - lin - q;
            // Relative floating-point allowance on the compared quantities.
            let scale = 1e-12 * (self.value(z2).abs() + self.value(z1).abs() + lin.abs());
            slack = slack.min(gap + scale);
        }
        slack
    }
}
