use super::{check_config, error_from_scalars, scalar_minimax, Bound, MinimaxOptions, TheoryOptions};
use crate::mathkit::{normal_pdf, q_function};
use crate::{ProblemConfig, Result};

/// Saddle of the ℓ∞ program.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinfSolution {
    pub tau: f64,
    pub delta: f64,
    pub gamma: f64,
    pub xi: f64,
    pub objective: f64,
    pub predicted_error: f64,
    /// `floor(d Q(delta / (lambda xi)))`: weights predicted at `+delta/lambda`
    /// (and as many at `-delta/lambda`).
    pub predicted_bound_count: u64,
}

/// `Xi(gamma, tau) = sqrt((1-r)/(2 sigma^4) (gamma/2 - 1 + 2c)^2 + 1/(n^2 tau^2 sigma^2))`.
pub fn xi(config: &ProblemConfig, tau: f64, gamma: f64) -> f64 {
    let n = config.n as f64;
    let s2 = config.sigma * config.sigma;
    let h = gamma / 2.0 - 1.0 + 2.0 * config.c;
    ((1.0 - config.r) / (2.0 * s2 * s2) * h * h + 1.0 / (n * n * tau * tau * s2)).sqrt()
}

/// The bracket `K(tau, delta, gamma)` whose positive part is squared in the
/// ℓ∞ program.
pub fn linf_inner(config: &ProblemConfig, tau: f64, delta: f64, gamma: f64) -> f64 {
    let (n, d) = (config.n as f64, config.d as f64);
    let s2 = config.sigma * config.sigma;
    let lambda = config.lambda;
    let x = xi(config, tau, gamma);
    let ratio = delta / (lambda * x);
    let nds = n * d * s2 * tau;
    1.0 / (2.0 * tau) + tau / 2.0 * (-n * gamma * gamma / 4.0 + n) - nds * x * x / 2.0
        - nds * delta * x / lambda * normal_pdf(ratio)
        + nds * (x * x + delta * delta / (lambda * lambda)) * q_function(ratio)
}

pub fn predict_linf(config: &ProblemConfig) -> Result<LinfSolution> {
    let opts = TheoryOptions { minimax: MinimaxOptions { outer_points: 60, ..Default::default() }, ..Default::default() };
    predict_linf_with(config, &opts)
}

/// `min_{tau, delta} max_gamma delta + K_+^2`. The outer search runs over
/// `(tau, kappa)` with `delta = kappa lambda / (n tau sigma)`, which puts the
/// clipping ratio `delta / (lambda Xi) <= kappa` on a fixed log scale.
pub fn predict_linf_with(config: &ProblemConfig, opts: &TheoryOptions) -> Result<LinfSolution> {
    check_config(config)?;
    let n = config.n as f64;
    let delta_of = |tau: f64, kappa: f64| kappa * config.lambda / (n * tau * config.sigma);
    let saddle = scalar_minimax(
        |o, i| {
            let delta = delta_of(o[0], o[1]);
            let k = linf_inner(config, o[0], delta, i[0]).max(0.0);
            delta + k * k
        },
        &[opts.tau_bound(n), Bound::log(1e-8, 1e4)],
        &[opts.gamma_bound()],
        &opts.minimax,
    )?;
    let (tau, kappa, gamma) = (saddle.outer[0], saddle.outer[1], saddle.inner[0]);
    let delta = delta_of(tau, kappa);
    let x = xi(config, tau, gamma);
    let predicted_bound_count = (config.d as f64 * q_function(delta / (config.lambda * x))).floor() as u64;
    Ok(LinfSolution {
        tau,
        delta,
        gamma,
        xi: x,
        objective: saddle.value,
        predicted_error: error_from_scalars(gamma, tau, config.n, config.c)?,
        predicted_bound_count,
    })
}
