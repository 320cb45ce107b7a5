//! Regularized least-squares classification of a two-class Gaussian mixture
//! with corrupted training labels.
//!
//! The crate pairs the high-dimensional side of the problem (sampling the
//! mixture, solving `min_w ||Xw - z||^2 + lambda f(w)` for ridge, ℓ1 and ℓ∞
//! penalties, and scoring the resulting classifiers) with the low-dimensional
//! side (the scalar min-max programs whose saddle points predict the
//! generalization error, sparsity and compression counts). The `harness`
//! module runs both and compares them.
//!
//! Numerical kernels, sampling, solvers and classifier evaluation are generic
//! over the floating-point type through [`Real`]; the scalar prediction
//! programs run in `f64`. The aliases below fix the common `f64` case.

pub mod approx;
pub mod classify;
pub mod datagen;
mod error;
pub mod harness;
pub mod mathkit;
mod scalar;
pub mod solvers;
pub mod theory;

pub use error::{Error, Result};
pub use scalar::Real;

/// `f64` mixture means.
pub type Means = datagen::Means<f64>;
/// `f64` training instance.
pub type GmmInstance = datagen::GmmInstance<f64>;
/// `f64` classifier weights.
pub type Weights = solvers::Weights<f64>;
/// `f64` quadrature rule.
pub type QuadratureRule = mathkit::QuadratureRule<f64>;
/// `f64` regularizer.
pub type Regularizer = solvers::Regularizer<f64>;
/// `f64` solver outcome.
pub type SolveOutcome = solvers::SolveOutcome<f64>;

pub use datagen::ProblemConfig;
