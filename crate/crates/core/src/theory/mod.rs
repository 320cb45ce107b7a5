//! Scalar min-max programs predicting the generalization error (and the
//! sparsity / saturation counts) of the regularized least-squares
//! classifier, and a generic grid-plus-refinement min-max driver.

mod l1;
mod linf;
mod master;
mod optim;
mod ridge;

use crate::mathkit::q_function;
use crate::{Error, ProblemConfig, Result};

pub use l1::{l1_objective, predict_l1, predict_l1_with, L1Solution};
pub use linf::{linf_inner, predict_linf, predict_linf_with, xi, LinfSolution};
pub use master::{master_objective, Expectation, predict_master, predict_master_with, MasterSolution};
pub use optim::{brent_min, nelder_mead, scalar_minimax, Bound, MinimaxOptions, Saddle};
pub use ridge::{predict_ridge, ridge_objective, RidgeSolution};

/// Search boxes and optimizer settings shared by the min-max predictors.
#[derive(Debug, Clone, PartialEq)]
pub struct TheoryOptions {
    pub minimax: MinimaxOptions,
    pub gamma: (f64, f64),
    /// Upper end of the `beta` box; `None` means `10 sqrt(n)`.
    pub beta_max: Option<f64>,
    /// Lower end of the log-scaled `beta` box, relative to `beta_max`.
    pub beta_min_ratio: f64,
    /// `tau` box as multiples of `1/n`.
    pub tau_range: (f64, f64),
}

impl Default for TheoryOptions {
    fn default() -> Self {
        Self {
            minimax: MinimaxOptions::default(),
            gamma: (-4.0, 4.0),
            beta_max: None,
            beta_min_ratio: 1e-10,
            tau_range: (1e-6, 1e2),
        }
    }
}

impl TheoryOptions {
    pub(crate) fn tau_bound(&self, n: f64) -> Bound {
        Bound::log(self.tau_range.0 / n, self.tau_range.1 / n)
    }

    pub(crate) fn beta_bound(&self, n: f64) -> Bound {
        let hi = self.beta_max.unwrap_or(10.0 * n.sqrt());
        Bound::log(hi * self.beta_min_ratio, hi)
    }

    pub(crate) fn gamma_bound(&self) -> Bound {
        Bound::linear(self.gamma.0, self.gamma.1)
    }
}

/// Parameter checks for the predictors. Unlike `ProblemConfig::validate`
/// these allow `c = 1/2` and do not require `d > n`.
pub(crate) fn check_config(config: &ProblemConfig) -> Result<()> {
    let ok = config.n > 0
        && config.d > 0
        && (0.0..=0.5).contains(&config.c)
        && (-1.0..=1.0).contains(&config.r)
        && config.sigma > 0.0
        && config.sigma.is_finite()
        && config.lambda > 0.0
        && config.lambda.is_finite();
    if ok {
        Ok(())
    } else {
        Err(Error::invalid(format!(
            "prediction needs n, d >= 1, c in [0, 1/2], |r| <= 1, sigma > 0 and lambda > 0; got {config:?}"
        )))
    }
}

/// Radicand `1/(n tau^2) - (1-c)(gamma/2 - 1)^2 - c(gamma/2 + 1)^2`, i.e.
/// `sigma^2 ||w||^2` at the saddle.
pub fn error_radicand(gamma: f64, tau: f64, n: usize, c: f64) -> f64 {
    let h = gamma / 2.0;
    1.0 / (n as f64 * tau * tau) - (1.0 - c) * (h - 1.0).powi(2) - c * (h + 1.0).powi(2)
}

/// `Q(gamma / (2 sqrt(radicand)))`.
pub fn error_from_scalars(gamma: f64, tau: f64, n: usize, c: f64) -> Result<f64> {
    if !(tau > 0.0) {
        return Err(Error::invalid(format!("tau must be positive, got {tau}")));
    }
    let rad = error_radicand(gamma, tau, n, c);
    if !(rad > 0.0) {
        return Err(Error::numerical(format!(
            "scalars inconsistent with a valid w norm (radicand {rad:e} at gamma = {gamma}, tau = {tau:e})"
        )));
    }
    Ok(q_function(gamma / (2.0 * rad.sqrt())))
}
