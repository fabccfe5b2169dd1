//! Experiment configuration: one TOML file per experiment, versioned by
//! `schema_version`.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::analysis::{BootstrapConfig, FitOptions};
use crate::density::{DensityField, DensitySpec, WorkingBox, DEFAULT_HEIGHT_BOUND};
use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::solver::{ShootingConfig, SolverConfig};

/// Schema version understood by this build.
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    Solve,
    Comparison,
    Example1,
    LambdaScaling,
    ErrorScaling,
    Bootstrap,
    Calibrate,
}

impl ExperimentKind {
    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::Solve => "solve",
            ExperimentKind::Comparison => "comparison",
            ExperimentKind::Example1 => "example1",
            ExperimentKind::LambdaScaling => "lambda_scaling",
            ExperimentKind::ErrorScaling => "error_scaling",
            ExperimentKind::Bootstrap => "bootstrap",
            ExperimentKind::Calibrate => "calibrate",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridConfig {
    /// Dimension `d = n − 1` of the base ball (1 or 2).
    pub dim: usize,
    pub center: Vec<f64>,
    pub radius: f64,
    /// Nodes per axis; several values give a refinement study.
    pub resolutions: Vec<usize>,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self { dim: 1, center: vec![0.5], radius: 0.5, resolutions: vec![4097] }
    }
}

impl GridConfig {
    pub fn center2(&self) -> [f64; 2] {
        [self.center.first().copied().unwrap_or(0.0), self.center.get(1).copied().unwrap_or(0.0)]
    }

    pub fn build(&self, resolution: usize) -> Result<Grid> {
        match self.dim {
            1 => Grid::interval(self.center[0], self.radius, resolution),
            _ => Grid::disc(self.center2(), self.radius, resolution),
        }
    }

    /// The same grid family on `B_r(center)`.
    pub fn with_radius(&self, radius: f64) -> Self {
        Self { radius, ..self.clone() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DensityConfig {
    /// Volume density.
    pub f: DensitySpec,
    /// Perimeter density.
    pub h: DensitySpec,
}

impl Default for DensityConfig {
    fn default() -> Self {
        Self { f: DensitySpec::Constant { c: 1.0 }, h: DensitySpec::Constant { c: 1.0 } }
    }
}

/// Dirichlet data on the boundary of the base ball.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum BoundarySpec {
    Zero,
    /// `offset + slope · x'`.
    Affine { offset: f64, slope: Vec<f64> },
}

impl Default for BoundarySpec {
    fn default() -> Self {
        BoundarySpec::Zero
    }
}

impl BoundarySpec {
    pub fn eval(&self, x: &[f64]) -> f64 {
        match self {
            BoundarySpec::Zero => 0.0,
            BoundarySpec::Affine { offset, slope } => offset + slope.iter().zip(x).map(|(a, b)| a * b).sum::<f64>(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProblemConfig {
    /// Target weighted volume `m`.
    pub m: f64,
    pub boundary: BoundarySpec,
    /// Height bound `T` of the working box.
    pub height: f64,
}

impl Default for ProblemConfig {
    fn default() -> Self {
        Self { m: 0.1, boundary: BoundarySpec::Zero, height: DEFAULT_HEIGHT_BOUND }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FamilyKind {
    /// Independent solves on `B_R(center)` with `m` scaled by `(R/R₀)^{n}`.
    Similar,
    /// Restrictions of one solution to `B_R(center)` with comparison solves.
    Windows,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepConfig {
    /// Values substituted for `α` in the perimeter density; empty keeps the
    /// density as written.
    pub alpha: Vec<f64>,
    /// Largest radius `R₀` of the family.
    pub r0: f64,
    /// Radii `R₀ 2^{−k}`, `k = 0..levels`.
    pub levels: usize,
    /// Center of the windows (or of the similar domains); empty means the
    /// grid center.
    pub center: Vec<f64>,
    pub family: FamilyKind,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self { alpha: Vec::new(), r0: 0.125, levels: 5, center: Vec::new(), family: FamilyKind::Windows }
    }
}

impl SweepConfig {
    pub fn radii(&self) -> Vec<f64> {
        (0..self.levels).map(|k| self.r0 * 0.5f64.powi(k as i32)).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ChecksConfig {
    /// Allowed deviation of solution exponents from their predictions.
    pub exponent_tolerance: f64,
    /// Allowed shortfall of scaling-law exponents below their floors.
    pub scaling_tolerance: f64,
    /// Sup-norm tolerance against the analytic arc.
    pub arc_tolerance: f64,
    /// Relative tolerance of `λ` against the arc curvature.
    pub arc_lambda_tolerance: f64,
    /// Sup-norm tolerance against the shooting oracle.
    pub shooting_tolerance: f64,
    /// Relative spread allowed for constants across refinements.
    pub stability_tolerance: f64,
    /// Allowed excess of `∫a_K(Dv)` over `∫a_K(Du)`.
    pub energy_slack: f64,
    /// Allowed weighted-volume mismatch between `u` and `v`.
    pub volume_tolerance: f64,
    /// Near-origin window `[zmin, zmax]` for the exponent of `w`.
    pub origin_window: (f64, f64),
    /// `K = k_factor · max|Du|` of the coarsest run, unless `k` is set.
    pub k_factor: f64,
    pub k: Option<f64>,
    /// Largest profile radius for `∂u` at the singular point.
    pub profile_rho0: f64,
    pub fit: FitOptions,
}

impl Default for ChecksConfig {
    fn default() -> Self {
        Self {
            exponent_tolerance: 0.05,
            scaling_tolerance: 0.1,
            arc_tolerance: 1e-5,
            arc_lambda_tolerance: 1e-4,
            shooting_tolerance: 1e-4,
            stability_tolerance: 0.2,
            energy_slack: 1e-8,
            volume_tolerance: 1e-10,
            origin_window: (1e-3, 3e-2),
            k_factor: 1.25,
            k: None,
            profile_rho0: 0.25,
            fit: FitOptions::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CalibrationConfig {
    /// `K` values for the `a_K` convexity certificate.
    pub k_values: Vec<f64>,
    /// Exponents of the synthetic `|x|^{1+σ}` fields.
    pub sigmas: Vec<f64>,
    pub resolution: usize,
    pub depth: usize,
    pub beta_tolerance: f64,
    /// Random pairs for the strong-convexity inequality.
    pub pairs: usize,
    /// Random instances per mode for the gradient check.
    pub gradient_instances: usize,
    pub gradient_tolerance: f64,
}

impl Default for CalibrationConfig {
    fn default() -> Self {
        Self {
            k_values: vec![1.0, 2.0, 5.0],
            sigmas: vec![0.25, 0.5, 0.75],
            resolution: 16385,
            depth: 6,
            beta_tolerance: 0.02,
            pairs: 10_000,
            gradient_instances: 20,
            gradient_tolerance: 1e-6,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub schema_version: u32,
    pub kind: ExperimentKind,
    #[serde(default)]
    pub name: Option<String>,
    /// Seed of every sampling operation.
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
    /// Permit discontinuous volume densities (results are recorded only).
    #[serde(default)]
    pub allow_discontinuous_f: bool,
    #[serde(default)]
    pub grid: GridConfig,
    #[serde(default)]
    pub density: DensityConfig,
    #[serde(default)]
    pub problem: ProblemConfig,
    #[serde(default)]
    pub sweep: SweepConfig,
    #[serde(default)]
    pub solver: SolverConfig,
    #[serde(default)]
    pub shooting: ShootingConfig,
    #[serde(default)]
    pub bootstrap: BootstrapConfig,
    #[serde(default)]
    pub checks: ChecksConfig,
    #[serde(default)]
    pub calibration: CalibrationConfig,
}

impl ExperimentConfig {
    /// Parses and validates a config file.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Config for the calibration suite with default settings.
    pub fn calibration() -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            kind: ExperimentKind::Calibrate,
            name: Some("calibrate".into()),
            seed: 0,
            output_dir: None,
            allow_discontinuous_f: false,
            grid: GridConfig::default(),
            density: DensityConfig::default(),
            problem: ProblemConfig::default(),
            sweep: SweepConfig::default(),
            solver: SolverConfig::default(),
            shooting: ShootingConfig::default(),
            bootstrap: BootstrapConfig::default(),
            checks: ChecksConfig::default(),
            calibration: CalibrationConfig::default(),
        }
    }

    /// Hex SHA-256 of the canonical JSON form (independent of formatting
    /// and key order in the source file).
    pub fn hash(&self) -> String {
        let canonical = serde_json::to_vec(self).expect("config serializes");
        hex::encode(Sha256::digest(&canonical))
    }

    /// Center of the sweep family.
    pub fn sweep_center(&self) -> Vec<f64> {
        if self.sweep.center.is_empty() {
            self.grid.center.clone()
        } else {
            self.sweep.center.clone()
        }
    }

    /// Perimeter densities of the sweep: one per `α`, or the written one.
    pub fn h_specs(&self) -> Vec<(Option<f64>, DensitySpec)> {
        if self.sweep.alpha.is_empty() {
            return vec![(alpha_of(&self.density.h), self.density.h.clone())];
        }
        self.sweep.alpha.iter().map(|&a| (Some(a), with_alpha(&self.density.h, a))).collect()
    }

    pub fn working_box(&self, grid: &GridConfig) -> Result<WorkingBox> {
        WorkingBox::new(grid.dim, grid.center2(), grid.radius, self.problem.height)
    }

    /// Builds `(f, h)` on the working box of `grid`.
    pub fn densities(&self, grid: &GridConfig, h: &DensitySpec) -> Result<(DensityField, DensityField)> {
        let bx = self.working_box(grid)?;
        let f = DensityField::from_spec(&self.density.f, &bx).map_err(config_error)?;
        let h = DensityField::from_spec(h, &bx).map_err(config_error)?;
        Ok((f, h))
    }

    pub fn validate(&self) -> Result<()> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(Error::Config(format!(
                "unsupported schema_version {} (this build reads {SCHEMA_VERSION})",
                self.schema_version
            )));
        }
        let g = &self.grid;
        if !(g.dim == 1 || g.dim == 2) {
            return Err(Error::Config(format!("grid.dim must be 1 or 2, got {}", g.dim)));
        }
        if g.center.len() != g.dim {
            return Err(Error::Config(format!("grid.center needs {} coordinates", g.dim)));
        }
        if !(g.radius > 0.0) {
            return Err(Error::Config("grid.radius must be positive".into()));
        }
        if g.resolutions.is_empty() {
            return Err(Error::Config("grid.resolutions must not be empty".into()));
        }
        let min_res = if g.dim == 1 { 3 } else { 5 };
        if g.resolutions.iter().any(|&r| r < min_res) {
            return Err(Error::Config(format!("grid resolutions must be at least {min_res}")));
        }
        if !self.allow_discontinuous_f && self.density.f.is_discontinuous() {
            return Err(Error::Config(
                "density.f is discontinuous; set allow_discontinuous_f = true to run it anyway".into(),
            ));
        }
        if self.density.h.is_discontinuous() {
            return Err(Error::Config("density.h must be Hölder continuous".into()));
        }
        for (_, h) in self.h_specs() {
            h.validate().map_err(config_error)?;
        }
        self.density.f.validate().map_err(config_error)?;
        if !(self.problem.m.is_finite() && self.problem.height > 0.0) {
            return Err(Error::Config("problem.m must be finite and problem.height positive".into()));
        }
        if let BoundarySpec::Affine { slope, .. } = &self.problem.boundary {
            if slope.len() != g.dim {
                return Err(Error::Config(format!("boundary slope needs {} entries", g.dim)));
            }
        }
        if self.sweep.alpha.iter().any(|a| !(*a > 0.0 && *a < 1.0)) {
            return Err(Error::Config("sweep.alpha values must lie in (0, 1)".into()));
        }
        if !self.sweep.alpha.is_empty() && alpha_of(&self.density.h).is_none() {
            return Err(Error::Config("sweep.alpha needs a perimeter density with an `alpha` parameter".into()));
        }
        if !(self.sweep.r0 > 0.0) || !(self.sweep.center.is_empty() || self.sweep.center.len() == g.dim) {
            return Err(Error::Config(format!("sweep.r0 must be positive and sweep.center needs {} coordinates", g.dim)));
        }
        let needs_family = matches!(
            self.kind,
            ExperimentKind::LambdaScaling | ExperimentKind::ErrorScaling | ExperimentKind::Bootstrap
        );
        if needs_family && self.sweep.levels < 4 {
            return Err(Error::Config("scaling families need sweep.levels ≥ 4".into()));
        }
        if self.kind == ExperimentKind::Example1 {
            if g.dim != 1 || (g.center[0] - g.radius).abs() > 1e-12 {
                return Err(Error::Config("example1 runs on the interval (0, ℓ): dim = 1 and center = radius".into()));
            }
            if !matches!(self.density.h, DensitySpec::Example1H { .. }) {
                return Err(Error::Config("example1 needs density.h of kind example1_h".into()));
            }
        }
        if self.kind == ExperimentKind::ErrorScaling && self.sweep.family != FamilyKind::Windows {
            return Err(Error::Config("error_scaling uses the windows family".into()));
        }
        if self.checks.k.is_some_and(|k| !(k > 0.0)) || !(self.checks.k_factor >= 1.0) {
            return Err(Error::Config("checks.k must be positive and checks.k_factor ≥ 1".into()));
        }
        self.solver.validate()?;
        self.bootstrap.validate()?;
        let c = &self.calibration;
        if c.k_values.iter().any(|k| !(*k > 0.0)) || c.sigmas.iter().any(|s| !(*s > 0.0 && *s < 1.0)) {
            return Err(Error::Config("calibration K values must be positive and σ values in (0, 1)".into()));
        }
        Ok(())
    }
}

fn config_error(e: Error) -> Error {
    match e {
        Error::Config(_) => e,
        other => Error::Config(other.to_string()),
    }
}

/// `α` parameter of a density, if it has one.
pub fn alpha_of(spec: &DensitySpec) -> Option<f64> {
    match spec {
        DensitySpec::Example1H { alpha }
        | DensitySpec::Example1Reciprocal { alpha }
        | DensitySpec::RadialHolder { alpha, .. } => Some(*alpha),
        _ => None,
    }
}

fn with_alpha(spec: &DensitySpec, a: f64) -> DensitySpec {
    match spec {
        DensitySpec::Example1H { .. } => DensitySpec::Example1H { alpha: a },
        DensitySpec::Example1Reciprocal { .. } => DensitySpec::Example1Reciprocal { alpha: a },
        DensitySpec::RadialHolder { c0, .. } => DensitySpec::RadialHolder { alpha: a, c0: *c0 },
        other => other.clone(),
    }
}
