//! Discrete energies, their exact gradients and Hessians.
//!
//! On every cell the graph is linear, so `Dw` is constant there. The
//! perimeter term uses one-point quadrature at the cell centroid, with the
//! height taken as the mean of the vertex values; the volume uses the
//! lumped node weights. Gradients and Hessians are exact derivatives of
//! these sums, which keeps the Newton solver and the finite-difference
//! checks consistent.

use serde::Serialize;

use crate::density::{nested_volume_integrand, DensityField};
use crate::error::{Error, Result};
use crate::grid::{Cell, GraphFunction, Grid};
use crate::integrand::{area, SurfaceIntegrand};
use crate::linalg::Banded;

/// Surface part of a discrete functional.
#[derive(Clone, Copy)]
pub enum Surface<'a> {
    /// `∫ h(x', w) a(Dw)`.
    Weighted(&'a DensityField),
    /// `∫ a_K(Dw)`.
    Comparison(&'a SurfaceIntegrand),
}

/// Value, gradient and Hessian of the untruncated area integrand.
#[inline]
fn area_derivs(z: [f64; 2]) -> (f64, [f64; 2], [[f64; 2]; 2]) {
    let a = area(z);
    let g = [z[0] / a, z[1] / a];
    let a3 = a * a * a;
    let h = [
        [(1.0 + z[1] * z[1]) / a3, -z[0] * z[1] / a3],
        [-z[0] * z[1] / a3, (1.0 + z[0] * z[0]) / a3],
    ];
    (a, g, h)
}

#[inline]
fn dot(a: [f64; 2], b: [f64; 2]) -> f64 {
    a[0] * b[0] + a[1] * b[1]
}

fn density_failure(h: &DensityField, x: &[f64], t: f64) -> Error {
    let mut point = x.to_vec();
    point.push(t);
    Error::EvaluationFailure { label: h.label.clone(), point }
}

/// Per-cell quantities shared by energy, gradient and Hessian.
struct CellTerms {
    weight: f64,
    a: f64,
    da: [f64; 2],
    d2a: [[f64; 2]; 2],
    /// `(h, h_t, h_tt)` at the centroid and mean height.
    h: [f64; 3],
}

impl Surface<'_> {
    fn cell_terms(&self, grid: &Grid, cell: &Cell, values: &[f64]) -> Result<CellTerms> {
        let z = cell.gradient(values);
        match self {
            Surface::Weighted(h) => {
                let t = cell.mean(values);
                let x = &cell.centroid[..grid.dim];
                let hv = h.eval_derivs(x, t);
                if !hv.iter().all(|v| v.is_finite()) {
                    return Err(density_failure(h, x, t));
                }
                let (a, da, d2a) = area_derivs(z);
                Ok(CellTerms { weight: cell.weight, a, da, d2a, h: hv })
            }
            Surface::Comparison(ak) => Ok(CellTerms {
                weight: cell.weight,
                a: ak.value(z),
                da: ak.gradient(z),
                d2a: ak.hessian(z),
                h: [1.0, 0.0, 0.0],
            }),
        }
    }

    /// Value only; cheaper than [`Self::cell_terms`].
    fn cell_energy(&self, grid: &Grid, cell: &Cell, values: &[f64]) -> Result<f64> {
        let z = cell.gradient(values);
        match self {
            Surface::Weighted(h) => {
                let t = cell.mean(values);
                let x = &cell.centroid[..grid.dim];
                let hv = h.eval(x, t);
                if !hv.is_finite() {
                    return Err(density_failure(h, x, t));
                }
                Ok(cell.weight * hv * area(z))
            }
            Surface::Comparison(ak) => Ok(cell.weight * ak.value(z)),
        }
    }
}

/// Discrete functional `E(w) + λ V(w)` on a fixed grid. Vectors indexed by
/// free node are "free vectors"; values are always full node vectors.
pub struct Discrete<'a> {
    pub grid: &'a Grid,
    pub f: &'a DensityField,
    pub surface: Surface<'a>,
}

impl<'a> Discrete<'a> {
    pub fn new(grid: &'a Grid, f: &'a DensityField, surface: Surface<'a>) -> Self {
        Self { grid, f, surface }
    }

    pub fn energy(&self, values: &[f64]) -> Result<f64> {
        let mut e = 0.0;
        for c in &self.grid.cells {
            e += self.surface.cell_energy(self.grid, c, values)?;
        }
        Ok(e)
    }

    pub fn volume(&self, values: &[f64]) -> Result<f64> {
        let mut v = 0.0;
        for (i, &w) in values.iter().enumerate() {
            v += self.grid.node_weights[i] * nested_volume_integrand(self.f, self.grid.x(i), w)?;
        }
        Ok(v)
    }

    /// Free-node gradient of the energy.
    pub fn energy_gradient(&self, values: &[f64]) -> Result<Vec<f64>> {
        let mut g = vec![0.0; self.grid.num_free()];
        for c in &self.grid.cells {
            let t = self.surface.cell_terms(self.grid, c, values)?;
            let inv_nv = 1.0 / c.nv as f64;
            for k in 0..c.nv {
                if let Some(p) = self.grid.free_index(c.verts[k]) {
                    g[p] += t.weight * (t.h[1] * inv_nv * t.a + t.h[0] * dot(t.da, c.grad[k]));
                }
            }
        }
        Ok(g)
    }

    /// Free-node gradient of the volume, `ω_i f(x_i, w_i)`.
    pub fn volume_gradient(&self, values: &[f64]) -> Result<Vec<f64>> {
        self.grid
            .free
            .iter()
            .map(|&i| Ok(self.grid.node_weights[i] * self.f.checked_eval(self.grid.x(i), values[i])?))
            .collect()
    }

    /// Diagonal of the volume Hessian, `ω_i ∂_t f(x_i, w_i)`.
    pub fn volume_hessian_diagonal(&self, values: &[f64]) -> Vec<f64> {
        self.grid
            .free
            .iter()
            .map(|&i| self.grid.node_weights[i] * self.f.eval_derivs(self.grid.x(i), values[i])[1])
            .collect()
    }

    /// Free-node Hessian of the energy in band storage.
    pub fn energy_hessian(&self, values: &[f64]) -> Result<Banded> {
        let n = self.grid.num_free();
        let mut hess = Banded::zeros(n, self.grid.free_bandwidth());
        for c in &self.grid.cells {
            let t = self.surface.cell_terms(self.grid, c, values)?;
            let inv_nv = 1.0 / c.nv as f64;
            let proj: Vec<f64> = (0..c.nv).map(|k| dot(t.da, c.grad[k])).collect();
            for k in 0..c.nv {
                let Some(p) = self.grid.free_index(c.verts[k]) else { continue };
                let mg = [
                    t.d2a[0][0] * c.grad[k][0] + t.d2a[0][1] * c.grad[k][1],
                    t.d2a[1][0] * c.grad[k][0] + t.d2a[1][1] * c.grad[k][1],
                ];
                for l in 0..c.nv {
                    let Some(q) = self.grid.free_index(c.verts[l]) else { continue };
                    let v = t.h[2] * inv_nv * inv_nv * t.a
                        + t.h[1] * inv_nv * (proj[k] + proj[l])
                        + t.h[0] * dot(mg, c.grad[l]);
                    hess.add(p, q, t.weight * v);
                }
            }
        }
        Ok(hess)
    }

    /// Free-node gradient of `E + λ V`.
    pub fn lagrangian_gradient(&self, values: &[f64], lambda: f64) -> Result<Vec<f64>> {
        let mut g = self.energy_gradient(values)?;
        let gv = self.volume_gradient(values)?;
        for (a, b) in g.iter_mut().zip(&gv) {
            *a += lambda * b;
        }
        Ok(g)
    }

    /// `max_i |∂_i (E + λ V)| / ω_i` over free nodes: the discrete
    /// Euler–Lagrange residual in strong (pointwise) scaling.
    pub fn kkt_residual(&self, values: &[f64], lambda: f64) -> Result<f64> {
        let g = self.lagrangian_gradient(values, lambda)?;
        Ok(self.scaled_max(&g))
    }

    /// `max_i |g_i| / ω_i` for a free vector.
    pub fn scaled_max(&self, g: &[f64]) -> f64 {
        g.iter()
            .zip(&self.grid.free)
            .map(|(v, &i)| v.abs() / self.grid.node_weights[i])
            .fold(0.0, f64::max)
    }

    /// Least-squares multiplier `λ = −⟨∇E, ∇V⟩_ω / ⟨∇V, ∇V⟩_ω`.
    pub fn multiplier_estimate(&self, values: &[f64]) -> Result<f64> {
        let ge = self.energy_gradient(values)?;
        let gv = self.volume_gradient(values)?;
        let (mut num, mut den) = (0.0, 0.0);
        for (k, &i) in self.grid.free.iter().enumerate() {
            let w = 1.0 / self.grid.node_weights[i];
            num += ge[k] * gv[k] * w;
            den += gv[k] * gv[k] * w;
        }
        Ok(-num / den)
    }
}

fn scatter(grid: &Grid, free: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; grid.num_nodes()];
    for (k, &i) in grid.free.iter().enumerate() {
        out[i] = free[k];
    }
    out
}

/// `∫ h(x', w) √(1 + |Dw|²)`.
pub fn weighted_perimeter(w: &GraphFunction, h: &DensityField) -> Result<f64> {
    let one = DensityField::constant(1.0);
    Discrete::new(&w.grid, &one, Surface::Weighted(h)).energy(&w.values)
}

/// Euclidean graph area `∫ √(1 + |Dw|²)`.
pub fn euclidean_area(w: &GraphFunction) -> f64 {
    w.grid.cells.iter().map(|c| c.weight * area(c.gradient(&w.values))).sum()
}

/// `∫ ∫₀^w f(x', t) dt dx'`.
pub fn weighted_volume(w: &GraphFunction, f: &DensityField) -> Result<f64> {
    let one = DensityField::constant(1.0);
    Discrete::new(&w.grid, f, Surface::Weighted(&one)).volume(&w.values)
}

/// `∫ a_K(Dw)`.
pub fn comparison_energy(w: &GraphFunction, integrand: &SurfaceIntegrand) -> f64 {
    w.grid.cells.iter().map(|c| c.weight * integrand.value(c.gradient(&w.values))).sum()
}

/// Per-node gradient of the discrete `P_h + λ V_f` with respect to the free
/// node values; zero on Dirichlet nodes.
pub fn first_variation_weighted(w: &GraphFunction, f: &DensityField, h: &DensityField, lambda: f64) -> Result<Vec<f64>> {
    let g = Discrete::new(&w.grid, f, Surface::Weighted(h)).lagrangian_gradient(&w.values, lambda)?;
    Ok(scatter(&w.grid, &g))
}

/// Per-node gradient of the discrete `∫ a_K(Dw) + λ V_f`; zero on Dirichlet
/// nodes.
pub fn first_variation_comparison(
    w: &GraphFunction,
    integrand: &SurfaceIntegrand,
    f: &DensityField,
    lambda: f64,
) -> Result<Vec<f64>> {
    let g = Discrete::new(&w.grid, f, Surface::Comparison(integrand)).lagrangian_gradient(&w.values, lambda)?;
    Ok(scatter(&w.grid, &g))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FunctionalValue {
    pub perimeter_weighted: f64,
    pub perimeter_euclidean_ak: f64,
    pub volume_weighted: f64,
}

impl FunctionalValue {
    pub fn evaluate(w: &GraphFunction, h: &DensityField, f: &DensityField, integrand: &SurfaceIntegrand) -> Result<Self> {
        Ok(Self {
            perimeter_weighted: weighted_perimeter(w, h)?,
            perimeter_euclidean_ak: comparison_energy(w, integrand),
            volume_weighted: weighted_volume(w, f)?,
        })
    }
}
