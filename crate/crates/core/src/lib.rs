//! Numerical laboratory for the isoperimetric problem with two densities,
//! written in graph form over a ball `B_R ⊂ R^d` (`d ∈ {1, 2}`).
//!
//! The crate minimizes the weighted perimeter `∫ h(x', w) √(1 + |Dw|²)`
//! under the weighted volume constraint `∫ ∫₀^w f(x', t) dt dx' = m`,
//! solves the frozen-density comparison problem with a strongly convex
//! truncated area integrand, and measures the regularity quantities of the
//! minimizers: Lagrange multiplier scaling, gradient oscillation decay and
//! fitted Hölder exponents.
//!
//! Module map:
//! - [`density`]: closed-form density fields and their Hölder metadata.
//! - [`grid`], [`integrand`], [`functional`]: discretization, the truncated
//!   integrand `a_K`, discrete energies and their exact gradients.
//! - [`solver`]: constrained minimization, the comparison problem, the 1D
//!   shooting oracle and the frozen-coefficient linear problem.
//! - [`analysis`]: Campanato profiles, exponent fits, scaling laws, the
//!   iteration lemma and the regularity bootstrap.
//! - [`experiment`]: config-driven experiment runner and calibration.

pub mod analysis;
pub mod density;
pub mod error;
pub mod experiment;
pub mod functional;
pub mod grid;
pub mod integrand;
pub mod linalg;
pub mod ode;
pub mod par;
pub mod roots;
pub mod solver;

pub use error::{Error, Result};
pub use par::Execution;
