use super::{brent_min, check_config, error_from_scalars};
use crate::mathkit::q_function;
use crate::{Error, ProblemConfig, Result};

/// Saddle of the two-variable ridge program.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RidgeSolution {
    pub alpha: f64,
    pub gamma: f64,
    pub objective: f64,
    pub predicted_error: f64,
}

impl RidgeSolution {
    /// `(gamma, tau)` of the general min-max program implied by this
    /// solution: `gamma_master = 2 gamma d (1-r)` and
    /// `tau = 1 / sqrt(n sigma^2 Omega + Theta)`.
    pub fn master_scalars(&self, config: &ProblemConfig) -> (f64, f64) {
        let (n, d, c, r, s2) = dims(config);
        let b = self.gamma * d * (1.0 - r);
        let omega = self.alpha * self.alpha * s2 * d + 2.0 * d * (1.0 - r) * self.gamma * self.gamma;
        let theta = theta(n, c, b);
        (2.0 * b, 1.0 / (n * s2 * omega + theta).sqrt())
    }

    /// The same error recomputed through `error_from_scalars`.
    pub fn error_via_scalars(&self, config: &ProblemConfig) -> Result<f64> {
        let (g, tau) = self.master_scalars(config);
        error_from_scalars(g, tau, config.n, config.c)
    }
}

fn dims(config: &ProblemConfig) -> (f64, f64, f64, f64, f64) {
    (config.n as f64, config.d as f64, config.c, config.r, config.sigma * config.sigma)
}

fn theta(n: f64, c: f64, b: f64) -> f64 {
    n * (1.0 - c) * (b - 1.0).powi(2) + n * c * (b + 1.0).powi(2)
}

/// `(alpha sigma^2 d + sqrt(n sigma^2 Omega + Theta))_+^2 + lambda Omega`.
pub fn ridge_objective(config: &ProblemConfig, alpha: f64, gamma: f64) -> f64 {
    let (n, d, c, r, s2) = dims(config);
    let omega = alpha * alpha * s2 * d + 2.0 * d * (1.0 - r) * gamma * gamma;
    let th = theta(n, c, gamma * d * (1.0 - r));
    let lead = (alpha * s2 * d + (n * s2 * omega + th).sqrt()).max(0.0);
    lead * lead + config.lambda * omega
}

/// Minimizes the ridge program by nested Brent searches in the scaled
/// variables `a = alpha sigma^2 d`, `b = gamma d (1-r)`, in which the
/// curvature is O(1) in both directions.
pub fn predict_ridge(config: &ProblemConfig) -> Result<RidgeSolution> {
    check_config(config)?;
    let (n, d, c, r, s2) = dims(config);
    let lambda = config.lambda;
    let one_r = 1.0 - r;
    if one_r <= 0.0 {
        // identical means: nothing to learn
        return Ok(RidgeSolution { alpha: 0.0, gamma: 0.0, objective: ridge_objective(config, 0.0, 0.0), predicted_error: 0.5 });
    }
    let omega = |a: f64, b: f64| a * a / (s2 * d) + 2.0 * b * b / (d * one_r);
    let f = |a: f64, b: f64| {
        let lead = (a + (n * s2 * omega(a, b) + theta(n, c, b)).sqrt()).max(0.0);
        lead * lead + lambda * omega(a, b)
    };
    // for fixed b the minimizer in a lies between the zero of the leading
    // term and 0
    let a_range = |b: f64| {
        let k = n * s2 * 2.0 * b * b / (d * one_r) + theta(n, c, b);
        let shrink = (1.0 - n / d).max(1e-3).sqrt();
        let lo = -2.0 * k.sqrt() / shrink - 1.0;
        (lo, 1.0)
    };
    let inner = |b: f64| -> (f64, f64) {
        let (lo, hi) = a_range(b);
        brent_min(&mut |a| f(a, b), lo, hi, 1e-13, 500)
    };
    let (b_lo, b_hi) = (-4.0, 4.0);
    let (b, val) = brent_min(&mut |b| inner(b).1, b_lo, b_hi, 1e-13, 500);
    let (a, _) = inner(b);
    let (alo, ahi) = a_range(b);
    let edge = |x: f64, lo: f64, hi: f64| (x - lo).abs() < 1e-9 * (hi - lo) || (hi - x).abs() < 1e-9 * (hi - lo);
    if edge(b, b_lo, b_hi) || edge(a, alo, ahi) {
        return Err(Error::numerical(format!(
            "ridge program minimizer on the search boundary (a = {a:e} in [{alo:e}, {ahi:e}], b = {b:e} in [{b_lo}, {b_hi}])"
        )));
    }
    let denom = (a * a / d + 2.0 * s2 * b * b / (d * one_r)).sqrt();
    let predicted_error = if denom > 0.0 { q_function(b / denom) } else { 0.5 };
    Ok(RidgeSolution { alpha: a / (s2 * d), gamma: b / (d * one_r), objective: val, predicted_error })
}
