//! Volume and perimeter densities.
//!
//! Densities are closed-form expressions of a point `(x', t)` with
//! `x' ∈ R^d` and height `t`. Each field carries its Hölder exponent, an
//! upper bound for its Hölder seminorm and lower/upper bounds, all valid on a
//! [`WorkingBox`] `[c - R, c + R]^d × (-T, T)`.

use std::fmt;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::par::Execution;

/// Default height bound `T` of the working box.
pub const DEFAULT_HEIGHT_BOUND: f64 = 10.0;

/// Box on which density metadata is certified: `[c - R, c + R]^d × (-T, T)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WorkingBox {
    pub dim: usize,
    pub center: [f64; 2],
    pub radius: f64,
    pub height: f64,
}

impl WorkingBox {
    pub fn new(dim: usize, center: [f64; 2], radius: f64, height: f64) -> Result<Self> {
        if !(dim == 1 || dim == 2) {
            return Err(Error::InvalidInput(format!("dimension must be 1 or 2, got {dim}")));
        }
        if !(radius > 0.0 && height > 0.0) {
            return Err(Error::InvalidInput("box radius and height must be positive".into()));
        }
        Ok(Self { dim, center, radius, height })
    }

    /// Symmetric interval `(-R, R)` (or square) at the origin.
    pub fn centered(dim: usize, radius: f64, height: f64) -> Result<Self> {
        Self::new(dim, [0.0; 2], radius, height)
    }

    /// Euclidean diameter of the full box in `R^{d+1}`.
    pub fn diameter(&self) -> f64 {
        (self.dim as f64 * (2.0 * self.radius).powi(2) + (2.0 * self.height).powi(2)).sqrt()
    }

    fn coord_abs_range(&self, k: usize) -> (f64, f64) {
        let lo = self.center[k] - self.radius;
        let hi = self.center[k] + self.radius;
        let max = lo.abs().max(hi.abs());
        let min = if lo <= 0.0 && hi >= 0.0 { 0.0 } else { lo.abs().min(hi.abs()) };
        (min, max)
    }

    fn radial_range(&self) -> (f64, f64) {
        let mut min2 = 0.0;
        let mut max2 = 0.0;
        for k in 0..self.dim {
            let (lo, hi) = self.coord_abs_range(k);
            min2 += lo * lo;
            max2 += hi * hi;
        }
        (min2.sqrt(), max2.sqrt())
    }
}

/// Built-in densities, addressed by `kind` in experiment configs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum DensitySpec {
    /// `c`
    Constant { c: f64 },
    /// `1 / (1 + Σ_k |x_k|^α + |t|^α)`
    Example1H { alpha: f64 },
    /// `1 + Σ_k |x_k|^α + |t|^α`, the reciprocal of `example1_h`.
    Example1Reciprocal { alpha: f64 },
    /// `c₀ + |x'|^α`
    RadialHolder { alpha: f64, c0: f64 },
    /// `a + b t`
    AffineT { a: f64, b: f64 },
    /// `below` for `t < at`, `above` otherwise. Not Hölder continuous.
    Step { below: f64, above: f64, at: f64 },
    Sum { terms: Vec<DensitySpec> },
    Product { factors: Vec<DensitySpec> },
}

impl DensitySpec {
    pub const KINDS: [&'static str; 8] = [
        "constant",
        "example1_h",
        "example1_reciprocal",
        "radial_holder",
        "affine_t",
        "step",
        "sum",
        "product",
    ];

    pub fn label(&self) -> String {
        match self {
            DensitySpec::Constant { c } => format!("constant({c})"),
            DensitySpec::Example1H { alpha } => format!("example1_h({alpha})"),
            DensitySpec::Example1Reciprocal { alpha } => format!("example1_reciprocal({alpha})"),
            DensitySpec::RadialHolder { alpha, c0 } => format!("radial_holder({alpha}, {c0})"),
            DensitySpec::AffineT { a, b } => format!("affine_t({a}, {b})"),
            DensitySpec::Step { below, above, at } => format!("step({below}, {above}, {at})"),
            DensitySpec::Sum { terms } => {
                let parts: Vec<_> = terms.iter().map(|t| t.label()).collect();
                format!("sum[{}]", parts.join(", "))
            }
            DensitySpec::Product { factors } => {
                let parts: Vec<_> = factors.iter().map(|t| t.label()).collect();
                format!("product[{}]", parts.join(", "))
            }
        }
    }

    /// `true` if the density does not depend on `t`.
    pub fn is_t_independent(&self) -> bool {
        match self {
            DensitySpec::Constant { .. } | DensitySpec::RadialHolder { .. } => true,
            DensitySpec::AffineT { b, .. } => *b == 0.0,
            DensitySpec::Example1H { .. } | DensitySpec::Example1Reciprocal { .. } => false,
            DensitySpec::Step { below, above, .. } => below == above,
            DensitySpec::Sum { terms } => terms.iter().all(Self::is_t_independent),
            DensitySpec::Product { factors } => factors.iter().all(Self::is_t_independent),
        }
    }

    /// `true` for densities without a finite Hölder seminorm.
    pub fn is_discontinuous(&self) -> bool {
        match self {
            DensitySpec::Step { below, above, .. } => below != above,
            DensitySpec::Sum { terms } => terms.iter().any(Self::is_discontinuous),
            DensitySpec::Product { factors } => factors.iter().any(Self::is_discontinuous),
            _ => false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let exponent_ok = |a: f64| a > 0.0 && a <= 1.0;
        match self {
            DensitySpec::Constant { c } if !(*c > 0.0 && c.is_finite()) => {
                Err(Error::InvalidInput(format!("constant density must be positive, got {c}")))
            }
            DensitySpec::Example1H { alpha }
            | DensitySpec::Example1Reciprocal { alpha }
            | DensitySpec::RadialHolder { alpha, .. }
                if !exponent_ok(*alpha) =>
            {
                Err(Error::InvalidInput(format!("Hölder exponent must lie in (0, 1], got {alpha}")))
            }
            DensitySpec::Sum { terms } if terms.is_empty() => {
                Err(Error::InvalidInput("sum density needs at least one term".into()))
            }
            DensitySpec::Product { factors } if factors.is_empty() => {
                Err(Error::InvalidInput("product density needs at least one factor".into()))
            }
            DensitySpec::Sum { terms } => terms.iter().try_for_each(Self::validate),
            DensitySpec::Product { factors } => factors.iter().try_for_each(Self::validate),
            _ => Ok(()),
        }
    }

    /// Value and first two `t`-derivatives.
    fn eval3(&self, x: &[f64], t: f64) -> [f64; 3] {
        match self {
            DensitySpec::Constant { c } => [*c, 0.0, 0.0],
            DensitySpec::Example1H { alpha } => {
                let (g, gt, gtt) = cusp_sum(x, t, *alpha);
                let s = 1.0 + g;
                [1.0 / s, -gt / (s * s), -gtt / (s * s) + 2.0 * gt * gt / (s * s * s)]
            }
            DensitySpec::Example1Reciprocal { alpha } => {
                let (g, gt, gtt) = cusp_sum(x, t, *alpha);
                [1.0 + g, gt, gtt]
            }
            DensitySpec::RadialHolder { alpha, c0 } => {
                let r2: f64 = x.iter().map(|v| v * v).sum();
                [c0 + r2.powf(0.5 * alpha), 0.0, 0.0]
            }
            DensitySpec::AffineT { a, b } => [a + b * t, *b, 0.0],
            DensitySpec::Step { below, above, at } => [if t < *at { *below } else { *above }, 0.0, 0.0],
            DensitySpec::Sum { terms } => terms.iter().fold([0.0; 3], |acc, s| {
                let v = s.eval3(x, t);
                [acc[0] + v[0], acc[1] + v[1], acc[2] + v[2]]
            }),
            DensitySpec::Product { factors } => factors.iter().fold([1.0, 0.0, 0.0], |acc, s| {
                let e = s.eval3(x, t);
                [
                    acc[0] * e[0],
                    acc[1] * e[0] + acc[0] * e[1],
                    acc[2] * e[0] + 2.0 * acc[1] * e[1] + acc[0] * e[2],
                ]
            }),
        }
    }

    /// Closed-form `∫₀^w f(x', t) dt` where available.
    fn antiderivative(&self, x: &[f64], w: f64) -> Option<f64> {
        match self {
            DensitySpec::AffineT { a, b } => Some(a * w + 0.5 * b * w * w),
            DensitySpec::Step { below, above, at } => {
                // ∫₀^w of a piecewise constant: signed lengths on each side of `at`.
                let seg = |lo: f64, hi: f64| -> f64 {
                    let below_len = (hi.min(*at) - lo.min(*at)).max(0.0);
                    let above_len = (hi.max(*at) - lo.max(*at)).max(0.0);
                    below * below_len + above * above_len
                };
                Some(if w >= 0.0 { seg(0.0, w) } else { -seg(w, 0.0) })
            }
            DensitySpec::Sum { terms } => terms.iter().map(|s| s.antiderivative(x, w)).sum(),
            _ if self.is_t_independent() => Some(self.eval3(x, 0.0)[0] * w),
            _ => None,
        }
    }

    /// `(exponent, seminorm, lower, upper)` on the box.
    fn metadata(&self, bx: &WorkingBox) -> (f64, f64, f64, f64) {
        let n = (bx.dim + 1) as f64;
        match self {
            DensitySpec::Constant { c } => (1.0, 0.0, *c, *c),
            DensitySpec::Example1H { alpha } | DensitySpec::Example1Reciprocal { alpha } => {
                let (mut gmin, mut gmax) = (0.0, bx.height.powf(*alpha));
                for k in 0..bx.dim {
                    let (lo, hi) = bx.coord_abs_range(k);
                    gmin += lo.powf(*alpha);
                    gmax += hi.powf(*alpha);
                }
                // Σ_k |p_k - q_k|^α ≤ n^{1-α/2} |p - q|^α, and s ↦ 1/(1+s) is 1-Lipschitz on s ≥ 0.
                let semi = n.powf(1.0 - 0.5 * alpha);
                if matches!(self, DensitySpec::Example1H { .. }) {
                    (*alpha, semi, 1.0 / (1.0 + gmax), 1.0 / (1.0 + gmin))
                } else {
                    (*alpha, semi, 1.0 + gmin, 1.0 + gmax)
                }
            }
            DensitySpec::RadialHolder { alpha, c0 } => {
                let (rmin, rmax) = bx.radial_range();
                (*alpha, 1.0, c0 + rmin.powf(*alpha), c0 + rmax.powf(*alpha))
            }
            DensitySpec::AffineT { a, b } => {
                let spread = b.abs() * bx.height;
                (1.0, b.abs(), a - spread, a + spread)
            }
            DensitySpec::Step { below, above, .. } => {
                let semi = if below == above { 0.0 } else { f64::INFINITY };
                (1.0, semi, below.min(*above), below.max(*above))
            }
            DensitySpec::Sum { terms } => {
                let parts: Vec<_> = terms.iter().map(|s| s.metadata(bx)).collect();
                let beta = parts.iter().map(|p| p.0).fold(1.0, f64::min);
                let diam = bx.diameter();
                let semi = parts.iter().map(|p| p.1 * diam.powf(p.0 - beta)).sum();
                let lo = parts.iter().map(|p| p.2).sum();
                let hi = parts.iter().map(|p| p.3).sum();
                (beta, semi, lo, hi)
            }
            DensitySpec::Product { factors } => {
                let parts: Vec<_> = factors.iter().map(|s| s.metadata(bx)).collect();
                let beta = parts.iter().map(|p| p.0).fold(1.0, f64::min);
                let diam = bx.diameter();
                let sup = |p: &(f64, f64, f64, f64)| p.2.abs().max(p.3.abs());
                let mut semi = 0.0;
                for (i, p) in parts.iter().enumerate() {
                    let others: f64 = parts.iter().enumerate().filter(|(j, _)| *j != i).map(|(_, q)| sup(q)).product();
                    semi += p.1 * diam.powf(p.0 - beta) * others;
                }
                let lo = parts.iter().map(|p| p.2).product();
                let hi = parts.iter().map(|p| p.3).product();
                (beta, semi, lo, hi)
            }
        }
    }
}

/// `g = Σ_k |x_k|^α + |t|^α` and its `t`-derivatives. The derivatives of
/// `|t|^α` are set to zero at `t = 0`, where they do not exist.
fn cusp_sum(x: &[f64], t: f64, alpha: f64) -> (f64, f64, f64) {
    let mut g: f64 = x.iter().map(|v| v.abs().powf(alpha)).sum();
    let at = t.abs();
    g += at.powf(alpha);
    if at == 0.0 {
        return (g, 0.0, 0.0);
    }
    let d1 = alpha * at.powf(alpha - 1.0) * t.signum();
    let d2 = alpha * (alpha - 1.0) * at.powf(alpha - 2.0);
    (g, d1, d2)
}

type CustomFn = Arc<dyn Fn(&[f64], f64) -> f64 + Send + Sync>;

#[derive(Clone)]
enum Repr {
    Spec(DensitySpec),
    Custom(CustomFn),
}

/// A positive density with Hölder metadata certified on a working box.
#[derive(Clone)]
pub struct DensityField {
    repr: Repr,
    pub holder_exponent: f64,
    pub holder_seminorm: f64,
    pub lower_bound: f64,
    pub upper_bound: f64,
    pub label: String,
}

impl fmt::Debug for DensityField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("DensityField")
            .field("label", &self.label)
            .field("holder_exponent", &self.holder_exponent)
            .field("holder_seminorm", &self.holder_seminorm)
            .field("lower_bound", &self.lower_bound)
            .field("upper_bound", &self.upper_bound)
            .finish()
    }
}

impl DensityField {
    /// Builds a catalog density and certifies its metadata on `bx`.
    pub fn from_spec(spec: &DensitySpec, bx: &WorkingBox) -> Result<Self> {
        spec.validate()?;
        let (holder_exponent, holder_seminorm, lower_bound, upper_bound) = spec.metadata(bx);
        if !(lower_bound > 0.0) {
            return Err(Error::InvalidInput(format!(
                "density {} is not bounded away from zero on the working box (lower bound {lower_bound})",
                spec.label()
            )));
        }
        Ok(Self {
            label: spec.label(),
            repr: Repr::Spec(spec.clone()),
            holder_exponent,
            holder_seminorm,
            lower_bound,
            upper_bound,
        })
    }

    pub fn constant(c: f64) -> Self {
        assert!(c > 0.0, "constant density must be positive");
        Self {
            label: format!("constant({c})"),
            repr: Repr::Spec(DensitySpec::Constant { c }),
            holder_exponent: 1.0,
            holder_seminorm: 0.0,
            lower_bound: c,
            upper_bound: c,
        }
    }

    /// Wraps an arbitrary closure. Metadata is taken on trust; derivatives
    /// in `t` are obtained by central differences.
    pub fn custom<F>(label: impl Into<String>, f: F, exponent: f64, seminorm: f64, bounds: (f64, f64)) -> Self
    where
        F: Fn(&[f64], f64) -> f64 + Send + Sync + 'static,
    {
        Self {
            label: label.into(),
            repr: Repr::Custom(Arc::new(f)),
            holder_exponent: exponent,
            holder_seminorm: seminorm,
            lower_bound: bounds.0,
            upper_bound: bounds.1,
        }
    }

    pub fn spec(&self) -> Option<&DensitySpec> {
        match &self.repr {
            Repr::Spec(s) => Some(s),
            Repr::Custom(_) => None,
        }
    }

    pub fn is_constant(&self) -> bool {
        matches!(self.repr, Repr::Spec(DensitySpec::Constant { .. }))
    }

    pub fn is_t_independent(&self) -> bool {
        match &self.repr {
            Repr::Spec(s) => s.is_t_independent(),
            Repr::Custom(_) => false,
        }
    }

    #[inline]
    pub fn eval(&self, x: &[f64], t: f64) -> f64 {
        match &self.repr {
            Repr::Spec(s) => s.eval3(x, t)[0],
            Repr::Custom(f) => f(x, t),
        }
    }

    /// `(f, ∂_t f, ∂²_t f)` at `(x', t)`.
    #[inline]
    pub fn eval_derivs(&self, x: &[f64], t: f64) -> [f64; 3] {
        match &self.repr {
            Repr::Spec(s) => s.eval3(x, t),
            Repr::Custom(f) => {
                let e = 1e-4 * (1.0 + t.abs());
                let (fm, f0, fp) = (f(x, t - e), f(x, t), f(x, t + e));
                [f0, (fp - fm) / (2.0 * e), (fp - 2.0 * f0 + fm) / (e * e)]
            }
        }
    }

    pub fn checked_eval(&self, x: &[f64], t: f64) -> Result<f64> {
        let v = self.eval(x, t);
        if v.is_finite() {
            Ok(v)
        } else {
            let mut point = x.to_vec();
            point.push(t);
            Err(Error::EvaluationFailure { label: self.label.clone(), point })
        }
    }

    /// `∫₀^w f(x', t) dt`; see [`nested_volume_integrand`].
    pub fn volume_integrand(&self, x: &[f64], w: f64) -> Result<f64> {
        nested_volume_integrand(self, x, w)
    }
}

/// Simpson panel count of the first pass in [`nested_volume_integrand`].
pub const QUADRATURE_PANELS: usize = 16;
/// Relative agreement required between successive Simpson passes.
pub const QUADRATURE_RTOL: f64 = 1e-10;
const QUADRATURE_MAX_PANELS: usize = 1 << 20;

/// `∫₀^w f(x', t) dt` with the sign convention of `w`.
///
/// Closed forms are used where the density admits one; otherwise composite
/// Simpson with [`QUADRATURE_PANELS`] panels, doubled until two passes agree
/// to [`QUADRATURE_RTOL`].
pub fn nested_volume_integrand(f: &DensityField, x: &[f64], w: f64) -> Result<f64> {
    if !w.is_finite() {
        return Err(Error::InvalidInput(format!("non-finite height {w}")));
    }
    if w == 0.0 {
        return Ok(0.0);
    }
    if let Some(spec) = f.spec() {
        if let Some(v) = spec.antiderivative(x, w) {
            return Ok(v);
        }
    }
    // Panels are graded toward t = 0 through t = w s⁴, which keeps Simpson's
    // order for the |t|^α cusps of the catalog densities.
    let integrand = |s: f64| -> Result<f64> {
        let s3 = s * s * s;
        Ok(f.checked_eval(x, w * s3 * s)? * 4.0 * w * s3)
    };
    let simpson = |panels: usize| -> Result<f64> {
        let h = 1.0 / panels as f64;
        let mut acc = integrand(1.0)?;
        for i in 1..panels {
            let wt = if i % 2 == 1 { 4.0 } else { 2.0 };
            acc += wt * integrand(i as f64 * h)?;
        }
        Ok(acc * h / 3.0)
    };
    let mut panels = QUADRATURE_PANELS;
    let mut prev = simpson(panels)?;
    loop {
        panels *= 2;
        let next = simpson(panels)?;
        let change = (next - prev).abs();
        if change <= QUADRATURE_RTOL * next.abs() {
            return Ok(next);
        }
        if panels >= QUADRATURE_MAX_PANELS {
            return Err(Error::Quadrature { point: x.to_vec(), height: w, change: change / next.abs() });
        }
        prev = next;
    }
}

/// Empirical Hölder seminorm `max |f(p) - f(q)| / |p - q|^β` over sampled
/// pairs in the box, with `β` the field's exponent.
///
/// Pairs are drawn three ways, in equal shares: independent uniform points,
/// pairs differing in a single coordinate, and local pairs at log-uniform
/// separation whose base point has coordinates randomly pinned to the box
/// center. The draw is fully determined by `seed`.
pub fn estimate_seminorm(
    field: &DensityField,
    bx: &WorkingBox,
    samples: usize,
    seed: u64,
    exec: Execution,
) -> Result<f64> {
    if samples < 2 {
        return Err(Error::InvalidInput("seminorm estimation needs at least 2 samples".into()));
    }
    let dim = bx.dim + 1;
    let lo: Vec<f64> = (0..dim).map(|k| if k < bx.dim { bx.center[k] - bx.radius } else { -bx.height }).collect();
    let hi: Vec<f64> = (0..dim).map(|k| if k < bx.dim { bx.center[k] + bx.radius } else { bx.height }).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pairs = Vec::with_capacity(samples);
    for i in 0..samples {
        let mut p: Vec<f64> = (0..dim).map(|k| rng.random_range(lo[k]..=hi[k])).collect();
        let q: Vec<f64> = match i % 3 {
            0 => (0..dim).map(|k| rng.random_range(lo[k]..=hi[k])).collect(),
            1 => {
                let axis = rng.random_range(0..dim);
                let mut q = p.clone();
                q[axis] = rng.random_range(lo[axis]..=hi[axis]);
                q
            }
            _ => {
                // Anchor half the coordinates at the box center, where the
                // cusps of the catalog densities sit.
                for k in 0..dim {
                    if rng.random_bool(0.5) {
                        p[k] = 0.5 * (lo[k] + hi[k]);
                    }
                }
                let scale = 10f64.powf(rng.random_range(-6.0..0.0)) * (hi[0] - lo[0]);
                (0..dim)
                    .map(|k| (p[k] + scale * rng.random_range(-1.0..=1.0)).clamp(lo[k], hi[k]))
                    .collect()
            }
        };
        pairs.push((p, q));
    }
    let beta = field.holder_exponent;
    let ratios = exec.try_map(pairs.len(), |i| -> Result<f64> {
        let (p, q) = &pairs[i];
        let fp = field.checked_eval(&p[..dim - 1], p[dim - 1])?;
        let fq = field.checked_eval(&q[..dim - 1], q[dim - 1])?;
        let dist = p.iter().zip(q).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
        Ok(if dist > 0.0 { (fp - fq).abs() / dist.powf(beta) } else { 0.0 })
    })?;
    Ok(ratios.into_iter().fold(0.0, f64::max))
}

/// Upper bound for the volume-density exponent `γ` used by the decay
/// estimates: `γ < min{α/2, 2(1-α)/(2-α)}`. Reported, not enforced.
pub fn gamma_smallness_bound(alpha: f64) -> f64 {
    (0.5 * alpha).min(2.0 * (1.0 - alpha) / (2.0 - alpha))
}
