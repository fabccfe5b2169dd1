//! Regularity measurements: Campanato profiles, exponent fits, scaling
//! laws, two-term decay bounds, the iteration lemma and the bootstrap.

mod bootstrap;
mod estimates;
mod family;
mod fit;
mod iteration;
mod oscillation;
mod regression;
mod scaling;

pub use fit::{fit_exponent, near_origin_exponent, ExponentFit, FitOptions, FitWindow};
pub use iteration::{iteration_conclusion, IterationOutcome, IterationParams, IterationVerdict, CONSTANT_CAP};
pub use oscillation::{ball_oscillation, ball_weights, oscillation_profile, OscillationProfile, MIN_BALL_NODES};
pub use regression::{fit_power_law, PowerFit};
pub use scaling::{
    comparison_error_scaling, lambda_scaling, ScalingSeries, SeriesStatus, INACTIVE_LAMBDA, ZERO_ERROR,
};
pub use bootstrap::{
    initial_exponent, optimal_exponent, regularity_bootstrap, stage_bound, BootstrapConfig, BootstrapReport,
    BootstrapStage,
};
pub use estimates::{
    caccioppoli_check, decay_constant, frozen_decay_constant, gradient_energy_in_ball, CaccioppoliCheck,
};
pub use family::{comparison_windows, restrict_solution, ComparisonWindow, WindowMeasurement};
