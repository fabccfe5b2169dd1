//! Shooting oracle for one-dimensional minimizers on `(0, ℓ)` with zero
//! boundary values and `f ≡ 1`, plus the closed-form circular arc.
//!
//! The Euler–Lagrange equation of `∫ h(z, w) a(w') + λ ∫ w` is written as
//! the first-order system
//!
//! ```text
//! w' = q / √(1 − q²),   q = p / h,
//! p' = ∂_t h(z, w) a(w') + λ,
//! V' = w,
//! ```
//!
//! with `p = h w'/a(w')`. The system is integrated from both ends, each
//! piece starting at distance `ε₀` from its end from a series seed (the
//! mirrored piece `s = ℓ − z` obeys the same system with `p̃ = −p`). The
//! two start amplitudes and `λ` are fixed by matching `w` and `p` at the
//! middle sample and imposing `V = m`, with a damped Newton iteration.
//! Integrating towards the middle keeps trial trajectories away from the
//! cusp of `h` at `w = 0`. Densities with a
//! cusp are reached by continuation in the cusp strength `θ ∈ [0, 1]`,
//! starting from the circular arc at `θ = 0`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ode::{integrate, OdeOptions};
use crate::roots::brent;

/// Perimeter density of the shooting problem, in closed form so that the
/// oracle shares no code with the variational solver.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ShootingDensity {
    /// `h ≡ 1`.
    Constant,
    /// `1 / (1 + θ(|z|^α + |w|^α))`.
    Example1 { alpha: f64 },
    /// `1 + θ(|z|^α + |w|^α)`.
    Example1Reciprocal { alpha: f64 },
}

impl ShootingDensity {
    /// `(h, ∂_t h)` at cusp strength `theta`.
    #[inline]
    fn eval(&self, z: f64, w: f64, theta: f64) -> (f64, f64) {
        match *self {
            ShootingDensity::Constant => (1.0, 0.0),
            ShootingDensity::Example1 { alpha } => {
                let s = 1.0 + theta * (z.abs().powf(alpha) + w.abs().powf(alpha));
                let gt = cusp_derivative(w, alpha);
                (1.0 / s, -theta * gt / (s * s))
            }
            ShootingDensity::Example1Reciprocal { alpha } => {
                let s = 1.0 + theta * (z.abs().powf(alpha) + w.abs().powf(alpha));
                (s, theta * cusp_derivative(w, alpha))
            }
        }
    }

    /// `c` with `∂_t h ≈ c · α|w|^{α−1} sgn(w)` as `w → 0` at a point where
    /// `h(z, 0) = h0`, and `α`.
    fn cusp(&self, theta: f64, h0: f64) -> Option<(f64, f64)> {
        match *self {
            ShootingDensity::Constant => None,
            ShootingDensity::Example1 { alpha } => Some((-theta * h0 * h0, alpha)),
            ShootingDensity::Example1Reciprocal { alpha } => Some((theta, alpha)),
        }
    }
}

#[inline]
fn cusp_derivative(w: f64, alpha: f64) -> f64 {
    if w == 0.0 {
        0.0
    } else {
        alpha * w.abs().powf(alpha - 1.0) * w.signum()
    }
}

/// Series seed at `z = ε₀`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ShootingStart {
    /// `w ≈ A z`; the unknown amplitude is `p(0) = A/√(1 + A²)`, and the
    /// integrable cusp contribution to `p` on `(0, ε₀)` is added in closed
    /// form.
    Transversal,
    /// `w ≈ A z^{1+σ}` with unknown `A`.
    Tangential { sigma: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ShootingConfig {
    /// Start abscissa relative to `ℓ`.
    pub eps_rel: f64,
    /// Output samples on `[0, ℓ]`, including both ends.
    pub samples: usize,
    pub continuation_steps: usize,
    pub tol: f64,
    pub max_newton: usize,
    pub rtol: f64,
    pub start: ShootingStart,
}

impl Default for ShootingConfig {
    fn default() -> Self {
        Self {
            eps_rel: 1e-6,
            samples: 4097,
            continuation_steps: 10,
            tol: 1e-10,
            max_newton: 40,
            rtol: 1e-11,
            start: ShootingStart::Transversal,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ShootingResult {
    pub z: Vec<f64>,
    pub w: Vec<f64>,
    pub slope: Vec<f64>,
    pub lambda: f64,
    /// Solved left start amplitude (`p(0)` or `A`, per the start mode).
    pub amplitude: f64,
    /// Solved right amplitude `−p(ℓ)`.
    pub amplitude_right: f64,
    pub residual: f64,
    pub newton_iterations: usize,
}

impl ShootingResult {
    /// Linear interpolation of `w` at `z`.
    pub fn value_at(&self, z: f64) -> f64 {
        let n = self.z.len();
        let len = self.z[n - 1];
        let t = (z / len * (n - 1) as f64).clamp(0.0, (n - 1) as f64);
        let i = (t.floor() as usize).min(n - 2);
        let s = t - i as f64;
        self.w[i] * (1.0 - s) + self.w[i + 1] * s
    }
}

/// Circular arc through `(0, 0)` and `(L, 0)` enclosing area `m` above the
/// chord.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ArcOracle {
    pub length: f64,
    pub area: f64,
    pub radius: f64,
    /// Central angle of the arc.
    pub angle: f64,
    /// Multiplier in the convention `∇E + λ∇V = 0`: `−1/r`.
    pub lambda: f64,
}

impl ArcOracle {
    pub fn value(&self, z: f64) -> f64 {
        let c = z - 0.5 * self.length;
        (self.radius * self.radius - c * c).max(0.0).sqrt() - self.radius * (0.5 * self.angle).cos()
    }

    pub fn slope(&self, z: f64) -> f64 {
        let c = z - 0.5 * self.length;
        -c / (self.radius * self.radius - c * c).sqrt()
    }
}

/// Solves `r²(θ − sin θ)/2 = m`, `2 r sin(θ/2) = L` for `θ ∈ (0, π]`.
pub fn arc_oracle(length: f64, area: f64) -> Result<ArcOracle> {
    if !(length > 0.0 && area > 0.0) {
        return Err(Error::InvalidInput("arc oracle needs positive length and area".into()));
    }
    let seg = |th: f64| {
        let r = length / (2.0 * (0.5 * th).sin());
        0.5 * r * r * (th - th.sin())
    };
    let max_area = seg(std::f64::consts::PI);
    if area > max_area {
        return Err(Error::InvalidInput(format!(
            "area {area} exceeds the half disc {max_area}; the arc is not a graph"
        )));
    }
    let angle = if area == max_area {
        std::f64::consts::PI
    } else {
        brent(|th| seg(th) - area, 1e-9, std::f64::consts::PI, 1e-15, 200)?
    };
    let radius = length / (2.0 * (0.5 * angle).sin());
    Ok(ArcOracle { length, area, radius, angle, lambda: -1.0 / radius })
}

struct Shooter {
    density: ShootingDensity,
    len: f64,
    m: f64,
    cfg: ShootingConfig,
    ode: OdeOptions,
    /// Matching abscissa.
    mid: f64,
}

/// Unknowns: left amplitude, right amplitude `p̃(0) = −p(ℓ)`, and `λ`.
type Unknowns = [f64; 3];

impl Shooter {
    /// Physical abscissa of the integration variable `s` of a piece.
    #[inline]
    fn abscissa(&self, s: f64, mirrored: bool) -> f64 {
        if mirrored {
            self.len - s
        } else {
            s
        }
    }

    /// Initial state `[w, p̃, V]` at `s = ε₀` of a piece.
    fn seed(&self, amp: f64, lambda: f64, theta: f64, mirrored: bool) -> Option<[f64; 3]> {
        let eps = self.cfg.eps_rel * self.len;
        let start = if mirrored { ShootingStart::Transversal } else { self.cfg.start };
        match start {
            ShootingStart::Transversal => {
                let (h0, _) = self.density.eval(self.abscissa(0.0, mirrored), 0.0, theta);
                let q0 = amp / h0;
                if q0.abs() >= 1.0 {
                    return None;
                }
                let a = q0 / (1.0 - q0 * q0).sqrt();
                let mut p = amp + lambda * eps;
                if let Some((c, alpha)) = self.density.cusp(theta, h0) {
                    if a != 0.0 {
                        // ∫₀^ε c α |A s|^{α−1} sgn(A) a(A) ds
                        p += c * a.signum() * a.abs().powf(alpha - 1.0) * (1.0 + a * a).sqrt() * eps.powf(alpha);
                    }
                }
                Some([a * eps, p, 0.5 * a * eps * eps])
            }
            ShootingStart::Tangential { sigma } => {
                let w = amp * eps.powf(1.0 + sigma);
                let dw = amp * (1.0 + sigma) * eps.powf(sigma);
                let (h, _) = self.density.eval(self.abscissa(eps, mirrored), w, theta);
                Some([w, h * dw / (1.0 + dw * dw).sqrt(), amp * eps.powf(2.0 + sigma) / (2.0 + sigma)])
            }
        }
    }

    /// Integrates one piece in its own variable `s` (`z = s` or `z = ℓ − s`)
    /// and returns the states at the `outputs` values of `s`.
    fn run(&self, amp: f64, lambda: f64, theta: f64, mirrored: bool, outputs: &[f64]) -> Result<Vec<[f64; 3]>> {
        let y0 = self
            .seed(amp, lambda, theta, mirrored)
            .ok_or_else(|| Error::NumericalFailure("shooting seed outside its domain".into()))?;
        let density = self.density;
        let len = self.len;
        let rhs = move |s: f64, y: &[f64; 3], dy: &mut [f64; 3]| -> bool {
            let z = if mirrored { len - s } else { s };
            let (h, ht) = density.eval(z, y[0], theta);
            let q = y[1] / h;
            if !(q.abs() < 1.0) || !(y[0] > 0.0) {
                return false;
            }
            let a = 1.0 / (1.0 - q * q).sqrt();
            dy[0] = q * a;
            dy[1] = ht * a + lambda;
            dy[2] = y[0];
            dy.iter().all(|v| v.is_finite())
        };
        integrate(rhs, self.cfg.eps_rel * self.len, y0, outputs, &self.ode)
    }

    /// Matching residual `[Δw/ℓ, Δp, (V − m)/ℓ²]` at the midpoint.
    fn residual(&self, u: Unknowns, theta: f64) -> Option<[f64; 3]> {
        let left = self.run(u[0], u[2], theta, false, &[self.mid]).ok()?[0];
        let right = self.run(u[1], u[2], theta, true, &[self.len - self.mid]).ok()?[0];
        let r = [
            (left[0] - right[0]) / self.len,
            left[1] + right[1],
            (left[2] + right[2] - self.m) / (self.len * self.len),
        ];
        r.iter().all(|v| v.is_finite()).then_some(r)
    }

    fn newton(&self, mut u: Unknowns, theta: f64) -> Result<(Unknowns, f64, usize)> {
        let norm = |r: [f64; 3]| (r[0] * r[0] + r[1] * r[1] + r[2] * r[2]).sqrt();
        let mut r = self
            .residual(u, theta)
            .ok_or_else(|| self.failure(u, theta, f64::INFINITY, 0))?;
        for it in 0..self.cfg.max_newton {
            if norm(r) <= self.cfg.tol {
                return Ok((u, norm(r), it));
            }
            let mut jac = [[0.0; 3]; 3];
            for k in 0..3 {
                let e = 1e-7 * (1.0 + u[k].abs());
                let mut up = u;
                let mut um = u;
                up[k] += e;
                um[k] -= e;
                let (rp, rm) = match (self.residual(up, theta), self.residual(um, theta)) {
                    (Some(a), Some(b)) => (a, b),
                    _ => return Err(self.failure(u, theta, norm(r), it)),
                };
                for i in 0..3 {
                    jac[i][k] = (rp[i] - rm[i]) / (2.0 * e);
                }
            }
            let du = solve3(jac, [-r[0], -r[1], -r[2]]).ok_or_else(|| self.failure(u, theta, norm(r), it))?;
            let mut t = 1.0;
            loop {
                let trial = [u[0] + t * du[0], u[1] + t * du[1], u[2] + t * du[2]];
                if let Some(rt) = self.residual(trial, theta) {
                    if norm(rt) < norm(r) {
                        u = trial;
                        r = rt;
                        break;
                    }
                }
                t *= 0.5;
                if t < 1e-10 {
                    // No decrease: accept if already at working precision.
                    if norm(r) <= 1e2 * self.cfg.tol {
                        return Ok((u, norm(r), it));
                    }
                    return Err(self.failure(u, theta, norm(r), it));
                }
            }
        }
        if norm(r) <= 1e2 * self.cfg.tol {
            Ok((u, norm(r), self.cfg.max_newton))
        } else {
            Err(self.failure(u, theta, norm(r), self.cfg.max_newton))
        }
    }

    /// Shooting error with the residual over an 11 × 11 box of
    /// (left amplitude, λ) around `u`.
    fn failure(&self, u: Unknowns, theta: f64, residual: f64, iterations: usize) -> Error {
        let mut residual_map = Vec::with_capacity(121);
        for i in 0..11 {
            for j in 0..11 {
                let a = u[0] * (1.0 + 0.1 * (i as f64 - 5.0)) + 0.01 * (i as f64 - 5.0);
                let l = u[2] * (1.0 + 0.1 * (j as f64 - 5.0)) + 0.01 * (j as f64 - 5.0);
                let r = self
                    .residual([a, u[1], l], theta)
                    .map_or(f64::NAN, |r| (r[0] * r[0] + r[1] * r[1] + r[2] * r[2]).sqrt());
                residual_map.push((a, l, r));
            }
        }
        Error::Shooting { iterations, residual, residual_map }
    }
}

/// Gaussian elimination with partial pivoting for a 3 × 3 system.
fn solve3(mut a: [[f64; 3]; 3], mut b: [f64; 3]) -> Option<[f64; 3]> {
    for i in 0..3 {
        let p = (i..3).max_by(|&x, &y| a[x][i].abs().total_cmp(&a[y][i].abs()))?;
        if !(a[p][i].abs() > 0.0) {
            return None;
        }
        a.swap(i, p);
        b.swap(i, p);
        for r in i + 1..3 {
            let m = a[r][i] / a[i][i];
            for c in i..3 {
                a[r][c] -= m * a[i][c];
            }
            b[r] -= m * b[i];
        }
    }
    let mut x = [0.0; 3];
    for i in (0..3).rev() {
        let s: f64 = (i + 1..3).map(|c| a[i][c] * x[c]).sum();
        x[i] = (b[i] - s) / a[i][i];
    }
    x.iter().all(|v| v.is_finite()).then_some(x)
}

/// Shoots the 1D problem for `density` on `(0, len)` with area `m`,
/// integrating from both ends and matching at the middle sample.
pub fn shoot(density: ShootingDensity, len: f64, m: f64, cfg: &ShootingConfig) -> Result<ShootingResult> {
    if !(len > 0.0 && m > 0.0) || cfg.samples < 5 || !(cfg.eps_rel > 0.0 && cfg.eps_rel < 1e-2) {
        return Err(Error::InvalidInput("shooting needs ℓ > 0, m > 0, ≥ 5 samples and small ε₀".into()));
    }
    if let ShootingDensity::Example1 { alpha } | ShootingDensity::Example1Reciprocal { alpha } = density {
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(Error::InvalidInput(format!("α must lie in (0, 1), got {alpha}")));
        }
    }
    let n = cfg.samples;
    let z: Vec<f64> = (0..n).map(|i| len * i as f64 / (n - 1) as f64).collect();
    let imid = (n - 1) / 2;
    let shooter = Shooter {
        density,
        len,
        m,
        cfg: *cfg,
        ode: OdeOptions { rtol: cfg.rtol, atol: 1e-2 * cfg.rtol * len, h_init: 1e-3 * cfg.eps_rel * len, ..OdeOptions::default() },
        mid: z[imid],
    };
    let arc = arc_oracle(len, m)?;
    let arc_slope = arc.slope(0.0);
    let p_arc = arc_slope / (1.0 + arc_slope * arc_slope).sqrt();
    let left0 = match cfg.start {
        ShootingStart::Transversal => p_arc,
        ShootingStart::Tangential { sigma } => arc_slope / ((1.0 + sigma) * (cfg.eps_rel * len).powf(sigma)),
    };
    let mut u = [left0, p_arc, arc.lambda];
    let constant = matches!(density, ShootingDensity::Constant);
    let steps = if constant { 0 } else { cfg.continuation_steps.max(1) };
    let mut total = 0;
    let mut residual = 0.0;
    for k in 0..=steps {
        let theta = if constant { 0.0 } else { k as f64 / steps as f64 };
        let (un, r, it) = shooter.newton(u, theta)?;
        u = un;
        residual = r;
        total += it;
    }
    let theta = if constant { 0.0 } else { 1.0 };
    let left = shooter.run(u[0], u[2], theta, false, &z[1..=imid])?;
    let s_right: Vec<f64> = (imid..n - 1).rev().map(|i| len - z[i]).collect();
    let right = shooter.run(u[1], u[2], theta, true, &s_right)?;
    let mut w = vec![0.0; n];
    let mut slope = vec![0.0; n];
    let slope_of = |zz: f64, y: &[f64; 3]| {
        let (h, _) = density.eval(zz, y[0], theta);
        let q = y[1] / h;
        q / (1.0 - q * q).sqrt()
    };
    for (k, y) in left.iter().enumerate() {
        w[k + 1] = y[0];
        slope[k + 1] = slope_of(z[k + 1], y);
    }
    // Right piece overwrites the matching sample with its own (equal to
    // shooting tolerance) value.
    for (k, y) in right.iter().enumerate() {
        let i = n - 2 - k;
        w[i] = y[0];
        slope[i] = -slope_of(z[i], y);
    }
    let end_slope = |amp: f64, zz: f64| {
        let (h0, _) = density.eval(zz, 0.0, theta);
        let q = amp / h0;
        q / (1.0 - q * q).sqrt()
    };
    slope[0] = match cfg.start {
        ShootingStart::Transversal => end_slope(u[0], 0.0),
        ShootingStart::Tangential { .. } => 0.0,
    };
    slope[n - 1] = -end_slope(u[1], len);
    Ok(ShootingResult {
        z,
        w,
        slope,
        lambda: u[2],
        amplitude: u[0],
        amplitude_right: u[1],
        residual,
        newton_iterations: total,
    })
}

/// Shooting oracle for Example 1: `h = 1/(1 + |z|^α + |w|^α)`, `f ≡ 1`.
pub fn shoot_example1(alpha: f64, len: f64, m: f64, cfg: &ShootingConfig) -> Result<ShootingResult> {
    shoot(ShootingDensity::Example1 { alpha }, len, m, cfg)
}
