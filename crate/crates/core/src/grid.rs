//! Grids over `B_R ⊂ R^d` and sampled graph functions.
//!
//! Both dimensions use piecewise-linear cells: intervals for `d = 1`, and
//! for `d = 2` two triangles per lattice square, weighted by the exact area
//! of their intersection with the disc. Vertices of cells cut by the circle
//! carry Dirichlet data, so every free node has a full, uncut star; lattice
//! nodes touching no weighted cell are masked out and never stored.

use std::path::Path;
use std::sync::Arc;

use crate::error::{Error, Result};

const NONE: usize = usize::MAX;

/// One piecewise-linear cell. For `d = 1` only the first two vertices and
/// the first gradient component are used.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cell {
    pub verts: [usize; 3],
    pub nv: usize,
    /// Gradients of the nodal basis functions (constant on the cell).
    pub grad: [[f64; 2]; 3],
    /// Measure of the cell inside the domain.
    pub weight: f64,
    pub centroid: [f64; 2],
}

impl Cell {
    #[inline]
    pub fn vertices(&self) -> &[usize] {
        &self.verts[..self.nv]
    }

    /// Gradient of the interpolant of `values` on this cell.
    #[inline]
    pub fn gradient(&self, values: &[f64]) -> [f64; 2] {
        let mut g = [0.0; 2];
        for k in 0..self.nv {
            let v = values[self.verts[k]];
            g[0] += v * self.grad[k][0];
            g[1] += v * self.grad[k][1];
        }
        g
    }

    /// Mean of the vertex values.
    #[inline]
    pub fn mean(&self, values: &[f64]) -> f64 {
        self.vertices().iter().map(|&i| values[i]).sum::<f64>() / self.nv as f64
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    pub dim: usize,
    pub center: [f64; 2],
    pub radius: f64,
    /// Lattice nodes per axis.
    pub resolution: usize,
    pub spacing: f64,
    pub nodes: Vec<[f64; 2]>,
    pub is_boundary: Vec<bool>,
    pub cells: Vec<Cell>,
    /// Lumped (trapezoidal) quadrature weight of every node.
    pub node_weights: Vec<f64>,
    /// Free (interior) nodes in elimination order.
    pub free: Vec<usize>,
    free_index: Vec<usize>,
    node_cell_start: Vec<usize>,
    node_cell_list: Vec<usize>,
}

impl Grid {
    /// Interval `(center - radius, center + radius)` with `resolution` nodes.
    pub fn interval(center: f64, radius: f64, resolution: usize) -> Result<Self> {
        if resolution < 3 {
            return Err(Error::InvalidInput("an interval grid needs at least 3 nodes".into()));
        }
        if !(radius > 0.0) {
            return Err(Error::InvalidInput("grid radius must be positive".into()));
        }
        let spacing = 2.0 * radius / (resolution - 1) as f64;
        let lo = center - radius;
        let nodes: Vec<[f64; 2]> = (0..resolution).map(|i| [lo + i as f64 * spacing, 0.0]).collect();
        let mut is_boundary = vec![false; resolution];
        is_boundary[0] = true;
        is_boundary[resolution - 1] = true;
        let cells = (0..resolution - 1)
            .map(|i| Cell {
                verts: [i, i + 1, NONE],
                nv: 2,
                grad: [[-1.0 / spacing, 0.0], [1.0 / spacing, 0.0], [0.0; 2]],
                weight: spacing,
                centroid: [lo + (i as f64 + 0.5) * spacing, 0.0],
            })
            .collect();
        Ok(Self::assemble(1, [center, 0.0], radius, resolution, spacing, nodes, is_boundary, cells))
    }

    /// Interval `(a, b)`.
    pub fn interval_between(a: f64, b: f64, resolution: usize) -> Result<Self> {
        if !(b > a) {
            return Err(Error::InvalidInput(format!("empty interval ({a}, {b})")));
        }
        Self::interval(0.5 * (a + b), 0.5 * (b - a), resolution)
    }

    /// Disc of `radius` about `center`, sampled on the square lattice
    /// `[c - R, c + R]²` with `resolution` nodes per axis.
    pub fn disc(center: [f64; 2], radius: f64, resolution: usize) -> Result<Self> {
        if resolution < 5 {
            return Err(Error::InvalidInput("a disc grid needs at least 5 nodes per axis".into()));
        }
        if !(radius > 0.0) {
            return Err(Error::InvalidInput("grid radius must be positive".into()));
        }
        let n = resolution;
        let h = 2.0 * radius / (n - 1) as f64;
        let coord = |i: usize, j: usize| [center[0] - radius + i as f64 * h, center[1] - radius + j as f64 * h];
        let mut lattice_id = vec![NONE; n * n];
        let mut nodes = Vec::new();
        let mut cells = Vec::new();
        let mut cut = Vec::new();
        let mut id_of = |i: usize, j: usize, nodes: &mut Vec<[f64; 2]>| -> usize {
            let k = j * n + i;
            if lattice_id[k] == NONE {
                lattice_id[k] = nodes.len();
                nodes.push(coord(i, j));
            }
            lattice_id[k]
        };
        for j in 0..n - 1 {
            for i in 0..n - 1 {
                let tris = [[(i, j), (i + 1, j), (i, j + 1)], [(i + 1, j + 1), (i, j + 1), (i + 1, j)]];
                for tri in tris {
                    let p = tri.map(|(a, b)| coord(a, b));
                    let area = polygon_disc_area(&p, center, radius);
                    if area <= 1e-14 * h * h {
                        continue;
                    }
                    let verts = tri.map(|(a, b)| id_of(a, b, &mut nodes));
                    if area < 0.5 * h * h * (1.0 - 1e-12) {
                        cut.extend_from_slice(&verts);
                    }
                    let grad = triangle_basis_gradients(&p);
                    let centroid = [(p[0][0] + p[1][0] + p[2][0]) / 3.0, (p[0][1] + p[1][1] + p[2][1]) / 3.0];
                    cells.push(Cell { verts, nv: 3, grad, weight: area, centroid });
                }
            }
        }
        let mut is_boundary: Vec<bool> = nodes
            .iter()
            .map(|x| ((x[0] - center[0]).powi(2) + (x[1] - center[1]).powi(2)).sqrt() >= radius * (1.0 - 1e-12))
            .collect();
        for v in cut {
            is_boundary[v] = true;
        }
        Ok(Self::assemble(2, center, radius, n, h, nodes, is_boundary, cells))
    }

    #[allow(clippy::too_many_arguments)]
    fn assemble(
        dim: usize,
        center: [f64; 2],
        radius: f64,
        resolution: usize,
        spacing: f64,
        nodes: Vec<[f64; 2]>,
        is_boundary: Vec<bool>,
        cells: Vec<Cell>,
    ) -> Self {
        let nn = nodes.len();
        let mut node_weights = vec![0.0; nn];
        let mut counts = vec![0usize; nn + 1];
        for c in &cells {
            for &v in c.vertices() {
                node_weights[v] += c.weight / c.nv as f64;
                counts[v + 1] += 1;
            }
        }
        for i in 0..nn {
            counts[i + 1] += counts[i];
        }
        let mut fill = counts.clone();
        let mut node_cell_list = vec![0; counts[nn]];
        for (ci, c) in cells.iter().enumerate() {
            for &v in c.vertices() {
                node_cell_list[fill[v]] = ci;
                fill[v] += 1;
            }
        }
        let mut free = Vec::new();
        let mut free_index = vec![NONE; nn];
        for i in 0..nn {
            if !is_boundary[i] {
                free_index[i] = free.len();
                free.push(i);
            }
        }
        Self {
            dim,
            center,
            radius,
            resolution,
            spacing,
            nodes,
            is_boundary,
            cells,
            node_weights,
            free,
            free_index,
            node_cell_start: counts,
            node_cell_list,
        }
    }

    pub fn num_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn num_free(&self) -> usize {
        self.free.len()
    }

    /// Position of `node` among the free nodes, if it is free.
    #[inline]
    pub fn free_index(&self, node: usize) -> Option<usize> {
        let k = self.free_index[node];
        (k != NONE).then_some(k)
    }

    pub fn boundary_nodes(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.nodes.len()).filter(|&i| self.is_boundary[i])
    }

    /// Cells incident to `node`.
    pub fn cells_of(&self, node: usize) -> &[usize] {
        &self.node_cell_list[self.node_cell_start[node]..self.node_cell_start[node + 1]]
    }

    /// Total measure of the domain.
    pub fn measure(&self) -> f64 {
        self.cells.iter().map(|c| c.weight).sum()
    }

    /// Coordinates of `node` as a slice of length `dim`.
    #[inline]
    pub fn x(&self, node: usize) -> &[f64] {
        &self.nodes[node][..self.dim]
    }

    pub fn distance(&self, node: usize, point: &[f64]) -> f64 {
        let x = &self.nodes[node];
        (0..self.dim).map(|k| (x[k] - point[k]).powi(2)).sum::<f64>().sqrt()
    }

    /// Half-bandwidth of the free-node coupling graph.
    pub fn free_bandwidth(&self) -> usize {
        let mut bw = 0;
        for c in &self.cells {
            let idx: Vec<usize> = c.vertices().iter().filter_map(|&v| self.free_index(v)).collect();
            for a in &idx {
                for b in &idx {
                    bw = bw.max(a.abs_diff(*b));
                }
            }
        }
        bw
    }

    /// Cell-weighted nodal average of the cell gradients: centered
    /// differences at interior nodes of a uniform interval grid, one-sided
    /// at its ends.
    pub fn nodal_derivative(&self, values: &[f64], axis: usize) -> Vec<f64> {
        let grads: Vec<[f64; 2]> = self.cells.iter().map(|c| c.gradient(values)).collect();
        (0..self.nodes.len())
            .map(|i| {
                let (mut num, mut den) = (0.0, 0.0);
                for &ci in self.cells_of(i) {
                    num += self.cells[ci].weight * grads[ci][axis];
                    den += self.cells[ci].weight;
                }
                num / den
            })
            .collect()
    }

    /// Sub-grid made of the cells whose vertices all lie in the closed ball
    /// `B_ρ(center)`. Returns the sub-grid and the parent index of each of
    /// its nodes. Nodes on the rim of the selection, or on the parent
    /// boundary, become Dirichlet nodes.
    pub fn restrict_to_ball(&self, center: &[f64], rho: f64) -> Result<(Grid, Vec<usize>)> {
        let tol = 1e-9 * self.spacing;
        let selected: Vec<bool> = self
            .cells
            .iter()
            .map(|c| c.vertices().iter().all(|&v| self.distance(v, center) <= rho + tol))
            .collect();
        let mut map = vec![NONE; self.nodes.len()];
        let mut parent = Vec::new();
        let mut cells = Vec::new();
        for (ci, c) in self.cells.iter().enumerate() {
            if !selected[ci] {
                continue;
            }
            let mut nc = *c;
            for k in 0..c.nv {
                let v = c.verts[k];
                if map[v] == NONE {
                    map[v] = parent.len();
                    parent.push(v);
                }
                nc.verts[k] = map[v];
            }
            cells.push(nc);
        }
        if cells.is_empty() {
            return Err(Error::InsufficientResolution { radius: rho, nodes: 0, required: 2 });
        }
        let nodes: Vec<[f64; 2]> = parent.iter().map(|&p| self.nodes[p]).collect();
        let is_boundary: Vec<bool> = parent
            .iter()
            .map(|&p| self.is_boundary[p] || self.cells_of(p).iter().any(|&ci| !selected[ci]))
            .collect();
        let mut sub = Self::assemble(self.dim, [0.0; 2], rho, self.resolution, self.spacing, nodes, is_boundary, cells);
        sub.center[..self.dim].copy_from_slice(&center[..self.dim]);
        if sub.free.is_empty() {
            return Err(Error::InsufficientResolution { radius: rho, nodes: sub.num_nodes(), required: 3 });
        }
        Ok((sub, parent))
    }
}

/// Gradients of the three barycentric basis functions of a triangle.
fn triangle_basis_gradients(p: &[[f64; 2]; 3]) -> [[f64; 2]; 3] {
    let det = (p[1][0] - p[0][0]) * (p[2][1] - p[0][1]) - (p[2][0] - p[0][0]) * (p[1][1] - p[0][1]);
    let mut g = [[0.0; 2]; 3];
    for k in 0..3 {
        let a = p[(k + 1) % 3];
        let b = p[(k + 2) % 3];
        g[k] = [(a[1] - b[1]) / det, (b[0] - a[0]) / det];
    }
    g
}

/// Exact area of a convex polygon intersected with a disc.
pub fn polygon_disc_area(poly: &[[f64; 2]], center: [f64; 2], radius: f64) -> f64 {
    let n = poly.len();
    let mut area = 0.0;
    for k in 0..n {
        let a = [poly[k][0] - center[0], poly[k][1] - center[1]];
        let b = [poly[(k + 1) % n][0] - center[0], poly[(k + 1) % n][1] - center[1]];
        area += wedge_disc_area(a, b, radius);
    }
    area.abs()
}

/// Signed area of triangle `(0, a, b)` intersected with the disc `|x| < r`.
fn wedge_disc_area(a: [f64; 2], b: [f64; 2], r: f64) -> f64 {
    let d = [b[0] - a[0], b[1] - a[1]];
    let qa = d[0] * d[0] + d[1] * d[1];
    let qb = 2.0 * (a[0] * d[0] + a[1] * d[1]);
    let qc = a[0] * a[0] + a[1] * a[1] - r * r;
    let mut ts = vec![0.0];
    let disc = qb * qb - 4.0 * qa * qc;
    if qa > 0.0 && disc > 0.0 {
        let sq = disc.sqrt();
        for t in [(-qb - sq) / (2.0 * qa), (-qb + sq) / (2.0 * qa)] {
            if t > 0.0 && t < 1.0 {
                ts.push(t);
            }
        }
    }
    ts.push(1.0);
    let at = |t: f64| [a[0] + t * d[0], a[1] + t * d[1]];
    let mut area = 0.0;
    for w in ts.windows(2) {
        let (p, q) = (at(w[0]), at(w[1]));
        let m = at(0.5 * (w[0] + w[1]));
        let cross = p[0] * q[1] - p[1] * q[0];
        if m[0] * m[0] + m[1] * m[1] <= r * r {
            area += 0.5 * cross;
        } else {
            let dot = p[0] * q[0] + p[1] * q[1];
            area += 0.5 * r * r * cross.atan2(dot);
        }
    }
    area
}

/// Sampled graph function `w` on a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct GraphFunction {
    pub grid: Arc<Grid>,
    pub values: Vec<f64>,
}

impl GraphFunction {
    pub fn new(grid: Arc<Grid>, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.num_nodes() {
            return Err(Error::InvalidInput(format!(
                "expected {} node values, got {}",
                grid.num_nodes(),
                values.len()
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidInput(format!("non-finite value at node {i}")));
        }
        Ok(Self { grid, values })
    }

    pub fn from_fn(grid: Arc<Grid>, f: impl Fn(&[f64]) -> f64) -> Self {
        let values = (0..grid.num_nodes()).map(|i| f(grid.x(i))).collect();
        Self { grid, values }
    }

    pub fn boundary_values(&self) -> Vec<(usize, f64)> {
        self.grid.boundary_nodes().map(|i| (i, self.values[i])).collect()
    }

    pub fn free_values(&self) -> Vec<f64> {
        self.grid.free.iter().map(|&i| self.values[i]).collect()
    }

    pub fn set_free_values(&mut self, free: &[f64]) {
        for (k, &i) in self.grid.free.iter().enumerate() {
            self.values[i] = free[k];
        }
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Largest cell gradient magnitude.
    pub fn max_gradient(&self) -> f64 {
        self.grid
            .cells
            .iter()
            .map(|c| {
                let g = c.gradient(&self.values);
                (g[0] * g[0] + g[1] * g[1]).sqrt()
            })
            .fold(0.0, f64::max)
    }

    /// Checks the height bound `max |w| ≤ T`.
    pub fn check_height(&self, height: f64) -> Result<()> {
        let s = self.sup_norm();
        if s > height {
            return Err(Error::InvalidInput(format!("graph leaves the height bound: max |w| = {s} > T = {height}")));
        }
        Ok(())
    }

    /// `∫ |D(self - other)|²` over the common grid.
    pub fn gradient_distance_sq(&self, other: &GraphFunction) -> f64 {
        self.grid
            .cells
            .iter()
            .map(|c| {
                let a = c.gradient(&self.values);
                let b = c.gradient(&other.values);
                c.weight * ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2))
            })
            .sum()
    }

    /// Restriction to a sub-grid produced by [`Grid::restrict_to_ball`].
    pub fn restrict(&self, sub: Arc<Grid>, parent: &[usize]) -> GraphFunction {
        let values = parent.iter().map(|&p| self.values[p]).collect();
        GraphFunction { grid: sub, values }
    }

    /// CSV with columns `node_index, x1[, x2], value`.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut wtr = csv::Writer::from_path(path)?;
        if self.grid.dim == 1 {
            wtr.write_record(["node_index", "x1", "value"])?;
        } else {
            wtr.write_record(["node_index", "x1", "x2", "value"])?;
        }
        for (i, v) in self.values.iter().enumerate() {
            let x = self.grid.x(i);
            let mut rec = vec![i.to_string()];
            rec.extend(x.iter().map(|c| format!("{c:.17e}")));
            rec.push(format!("{v:.17e}"));
            wtr.write_record(&rec)?;
        }
        wtr.flush()?;
        Ok(())
    }
}
