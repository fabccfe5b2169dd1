//! Augmented Lagrangian outer loop, damped Newton inner loop and a final
//! Newton polish on the full KKT system.

use crate::density::DensityField;
use crate::error::{Error, Result};
use crate::functional::{weighted_volume, Discrete};
use crate::grid::GraphFunction;
use crate::integrand::SurfaceIntegrand;
use crate::linalg::{Banded, Cholesky};

use super::{Mode, ProblemSpec, Solution, SolverConfig};

/// Loose stationarity at which the KKT polish is first attempted.
const POLISH_KKT: f64 = 1e-3;
const POLISH_VOL: f64 = 1e-6;
/// Smallest accepted line-search step.
const MIN_STEP: f64 = 1e-12;

/// Minimizes the problem's surface energy under its volume constraint,
/// starting from [`ProblemSpec::initial_iterate`].
pub fn solve_constrained(spec: &ProblemSpec, cfg: &SolverConfig) -> Result<Solution> {
    let start = spec.initial_iterate()?;
    solve_from(spec, cfg, start, cfg.initial_lambda)
}

/// Comparison problem for a converged weighted solution `u`: minimize
/// `∫ a_K(Dv)` with `v = u` on the Dirichlet nodes and `V_f(v) = V_f(u)`.
/// Starts from `u` itself.
pub fn solve_comparison(
    u: &Solution,
    integrand: &SurfaceIntegrand,
    f: &DensityField,
    cfg: &SolverConfig,
) -> Result<Solution> {
    if !u.converged {
        return Err(Error::InvalidInput("comparison problem needs a converged weighted solution".into()));
    }
    let grid = u.w.grid.clone();
    let spec = ProblemSpec {
        target_volume: weighted_volume(&u.w, f)?,
        boundary: u.w.values.clone(),
        integrand: Some(*integrand),
        mode: Mode::Comparison,
        height: cfg.height,
        f: f.clone(),
        h: DensityField::constant(1.0),
        grid,
    };
    spec.validate()?;
    solve_from(&spec, cfg, u.w.values.clone(), u.lambda)
}

/// Evaluated state of an iterate.
struct State {
    volume: f64,
    ge: Vec<f64>,
    gv: Vec<f64>,
}

fn evaluate(d: &Discrete, values: &[f64]) -> Result<State> {
    Ok(State { volume: d.volume(values)?, ge: d.energy_gradient(values)?, gv: d.volume_gradient(values)? })
}

fn combine(a: &[f64], s: f64, b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x + s * y).collect()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn ensure_finite(values: &[f64]) -> Result<()> {
    match values.iter().position(|v| !v.is_finite()) {
        Some(i) => Err(Error::NumericalFailure(format!("iterate lost finiteness at node {i}"))),
        None => Ok(()),
    }
}

/// Cholesky of `h + τ I` with the smallest `τ` from a geometric ladder that
/// yields a positive definite matrix.
fn shifted_cholesky(mut h: Banded) -> Result<Cholesky> {
    if let Ok(c) = h.cholesky() {
        return Ok(c);
    }
    let scale = (0..h.dim()).map(|i| h.get(i, i).abs()).fold(0.0, f64::max).max(1e-300);
    let mut tau = 1e-10 * scale;
    let mut applied = 0.0;
    for _ in 0..40 {
        h.add_diagonal(tau - applied);
        applied = tau;
        if let Ok(c) = h.cholesky() {
            return Ok(c);
        }
        tau *= 10.0;
    }
    Err(Error::NumericalFailure("could not regularize the Newton matrix".into()))
}

struct Runner<'a> {
    spec: &'a ProblemSpec,
    cfg: &'a SolverConfig,
    d: Discrete<'a>,
}

impl Runner<'_> {
    fn step(&self, values: &[f64], dir: &[f64], t: f64) -> Vec<f64> {
        let mut out = values.to_vec();
        for (k, &i) in self.spec.grid.free.iter().enumerate() {
            out[i] += t * dir[k];
        }
        out
    }

    /// `E + λ c + ρ/2 c²`, or `None` if evaluation fails.
    fn merit(&self, values: &[f64], lambda: f64, rho: f64) -> Option<f64> {
        let e = self.d.energy(values).ok()?;
        let c = self.d.volume(values).ok()? - self.spec.target_volume;
        let v = e + lambda * c + 0.5 * rho * c * c;
        v.is_finite().then_some(v)
    }

    /// Damped Newton on the augmented Lagrangian. Returns the scaled
    /// gradient norm reached and the number of Newton steps taken.
    fn inner(&self, values: &mut Vec<f64>, lambda: f64, rho: f64, tol: f64) -> Result<(f64, usize)> {
        let m = self.spec.target_volume;
        let mut gnorm = f64::INFINITY;
        for it in 0..self.cfg.max_inner {
            let s = evaluate(&self.d, values)?;
            let c = s.volume - m;
            let mu = lambda + rho * c;
            let g = combine(&s.ge, mu, &s.gv);
            gnorm = self.d.scaled_max(&g);
            if gnorm <= tol {
                return Ok((gnorm, it));
            }
            let mut h = self.d.energy_hessian(values)?;
            let hv = self.d.volume_hessian_diagonal(values);
            for (i, v) in hv.iter().enumerate() {
                h.add(i, i, mu * v);
            }
            let chol = shifted_cholesky(h)?;
            // (B + ρ gv gvᵀ) d = −g by Sherman–Morrison.
            let neg_g: Vec<f64> = g.iter().map(|v| -v).collect();
            let y = chol.solve(&neg_g);
            let z = chol.solve(&s.gv);
            let coef = rho * dot(&s.gv, &y) / (1.0 + rho * dot(&s.gv, &z));
            let mut dir = combine(&y, -coef, &z);
            let mut slope = dot(&g, &dir);
            if !(slope < 0.0) {
                dir = neg_g;
                slope = -dot(&g, &g);
            }
            let phi0 = self.merit(values, lambda, rho).ok_or_else(|| {
                Error::NumericalFailure("energy evaluation failed at the current iterate".into())
            })?;
            let mut t = 1.0;
            let accepted = loop {
                let trial = self.step(values, &dir, t);
                if let Some(phi) = self.merit(&trial, lambda, rho) {
                    if phi <= phi0 + self.cfg.armijo * t * slope {
                        break Some(trial);
                    }
                }
                t *= self.cfg.backtrack;
                if t < MIN_STEP {
                    break None;
                }
            };
            match accepted {
                Some(next) => *values = next,
                // No further decrease is representable: stationary to
                // working precision.
                None => return Ok((gnorm, it)),
            }
        }
        Ok((gnorm, self.cfg.max_inner))
    }

    /// Newton iterations on the full KKT system; returns the best iterate
    /// found as `(values, λ, kkt, mismatch, steps)`.
    fn polish(&self, values: &[f64], lambda: f64) -> Result<(Vec<f64>, f64, f64, f64, usize)> {
        let m = self.spec.target_volume;
        let mut cur = values.to_vec();
        let mut lam = lambda;
        let mut best: Option<(Vec<f64>, f64, f64, f64)> = None;
        let mut worse = 0;
        for it in 0..=self.cfg.max_polish {
            let s = evaluate(&self.d, &cur)?;
            let c = s.volume - m;
            let g = combine(&s.ge, lam, &s.gv);
            let kkt = self.d.scaled_max(&g);
            let score = |k: f64, v: f64| k / self.cfg.tol_kkt + v.abs() / self.cfg.tol_vol;
            let improved = best.as_ref().map_or(true, |b| score(kkt, c) < score(b.2, b.3));
            if improved {
                best = Some((cur.clone(), lam, kkt, c));
                worse = 0;
            } else {
                worse += 1;
            }
            if (kkt <= self.cfg.tol_kkt && c.abs() <= self.cfg.tol_vol) || worse >= 3 || it == self.cfg.max_polish {
                let b = best.expect("at least one polish iterate");
                return Ok((b.0, b.1, b.2, b.3, it));
            }
            let mut h = self.d.energy_hessian(&cur)?;
            let hv = self.d.volume_hessian_diagonal(&cur);
            for (i, v) in hv.iter().enumerate() {
                h.add(i, i, lam * v);
            }
            let sol = h.lu_solve_many(&[&g, &s.gv])?;
            let (x1, x2) = (&sol[0], &sol[1]);
            let denom = dot(&s.gv, x2);
            if !(denom.abs() > 0.0) {
                return Err(Error::NumericalFailure("degenerate KKT Schur complement".into()));
            }
            let dlam = (c - dot(&s.gv, x1)) / denom;
            let dir: Vec<f64> = x1.iter().zip(x2).map(|(a, b)| -a - b * dlam).collect();
            cur = self.step(&cur, &dir, 1.0);
            lam += dlam;
            if ensure_finite(&cur).is_err() || !lam.is_finite() {
                let b = best.expect("at least one polish iterate");
                return Ok((b.0, b.1, b.2, b.3, it + 1));
            }
        }
        unreachable!("polish loop returns on its last iteration")
    }
}

pub(crate) fn solve_from(spec: &ProblemSpec, cfg: &SolverConfig, start: Vec<f64>, lambda0: f64) -> Result<Solution> {
    cfg.validate()?;
    let grid = &spec.grid;
    if start.len() != grid.num_nodes() {
        return Err(Error::InvalidInput("initial iterate has the wrong length".into()));
    }
    let runner = Runner { spec, cfg, d: spec.discrete() };
    let mut values = start;
    // Dirichlet data always come from the problem.
    for i in grid.boundary_nodes() {
        values[i] = spec.boundary[i];
    }
    let measure = grid.measure();
    let mut rho = cfg.penalty / measure;
    let mut lambda = lambda0;
    let mut inner_tol = POLISH_KKT;
    let mut prev_c = f64::INFINITY;
    let mut iterations = 0;
    let mut history = Vec::new();
    let mut best: Option<Solution> = None;
    let m = spec.target_volume;

    let finish = |values: Vec<f64>, lambda: f64, kkt: f64, c: f64, iterations: usize| -> Result<Solution> {
        let w = GraphFunction::new(grid.clone(), values)?;
        let energy = runner.d.energy(&w.values)?;
        let converged = kkt <= cfg.tol_kkt && c.abs() <= cfg.tol_vol;
        Ok(Solution { w, lambda, kkt_residual: kkt, volume_mismatch: c, iterations, converged, mode: spec.mode, energy })
    };

    for outer in 0..cfg.max_outer {
        let (_, steps) = runner.inner(&mut values, lambda, rho, inner_tol)?;
        ensure_finite(&values)?;
        iterations += steps;
        let c = runner.d.volume(&values)? - m;
        lambda += rho * c;
        let kkt = runner.d.kkt_residual(&values, lambda)?;
        history.push((kkt, c));
        if kkt <= POLISH_KKT && c.abs() <= POLISH_VOL {
            let (pv, pl, pk, pc, psteps) = runner.polish(&values, lambda)?;
            iterations += psteps;
            let sol = finish(pv.clone(), pl, pk, pc, iterations)?;
            if sol.converged {
                sol.w.check_height(spec.height)
                    .map_err(|e| Error::NumericalFailure(format!("converged graph violates the height bound: {e}")))?;
                return Ok(sol);
            }
            if best.as_ref().map_or(true, |b| pk < b.kkt_residual) {
                best = Some(sol);
            }
            // Continue the outer loop from the polished iterate.
            values = pv;
            lambda = pl;
        }
        if c.abs() > 0.25 * prev_c.abs() {
            rho *= cfg.penalty_growth;
        }
        prev_c = c;
        inner_tol = (inner_tol * 0.1).max(0.1 * cfg.tol_kkt);
        if best.is_none() && outer + 1 == cfg.max_outer {
            best = Some(finish(values.clone(), lambda, kkt, c, iterations)?);
        }
    }
    let best = match best {
        Some(b) => b,
        None => {
            let c = runner.d.volume(&values)? - m;
            let kkt = runner.d.kkt_residual(&values, lambda)?;
            finish(values, lambda, kkt, c, iterations)?
        }
    };
    Err(Error::NonConvergence {
        iterations: cfg.max_outer,
        kkt: best.kkt_residual,
        volume: best.volume_mismatch,
        best: Box::new(best),
        history,
    })
}
