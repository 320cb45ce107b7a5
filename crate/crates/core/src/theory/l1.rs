use super::{check_config, error_from_scalars, scalar_minimax, TheoryOptions};
use crate::mathkit::{normal_pdf, q_function, truncated_moment};
use crate::{ProblemConfig, Result};

/// Saddle of the ℓ1 program.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct L1Solution {
    pub tau: f64,
    pub beta: f64,
    pub gamma: f64,
    pub sigma_tilde: f64,
    pub s: f64,
    pub objective: f64,
    pub predicted_error: f64,
    /// `floor(2 d Q(lambda / (n beta tau sigma_tilde)))`, the predicted
    /// number of nonzero weights.
    pub predicted_sparsity: u64,
    /// Set when the predicted solution is `w = 0`; the error is then the
    /// chance level 1/2.
    pub degenerate: bool,
}

fn sigma_tilde(config: &ProblemConfig, tau: f64, gamma: f64) -> f64 {
    let n = config.n as f64;
    let k = gamma / 4.0 - (1.0 - 2.0 * config.c) / 2.0;
    (config.sigma * config.sigma / (n * n * tau * tau) + 2.0 * k * k * (1.0 - config.r)).sqrt()
}

/// The ℓ1 min-max objective in `(tau, beta, gamma)`, with the soft-threshold
/// solution substituted in closed form.
pub fn l1_objective(config: &ProblemConfig, tau: f64, beta: f64, gamma: f64) -> f64 {
    let (n, d, c, r) = (config.n as f64, config.d as f64, config.c, config.r);
    let s2 = config.sigma * config.sigma;
    let lambda = config.lambda;
    let st = sigma_tilde(config, tau, gamma);
    let nbt = n * beta * tau;
    let u = lambda / (nbt * st);
    let q = q_function(u);
    let s = st * nbt / lambda;
    let tm = match truncated_moment(s) {
        Ok(v) => v,
        Err(_) => return f64::NAN,
    };
    let m = lambda / (nbt * s2);
    let k = (1.0 - 2.0 * c) / 2.0 - gamma / 4.0;
    let half_btn = beta * tau * n / 2.0;
    -2.0 * d * beta / (n * tau) * q
        + beta / (2.0 * tau)
        + half_btn * (d * s2 * m * m * tm + 2.0 * gamma * d / s2 * q * k * (1.0 - r))
        + half_btn * (-gamma * gamma / 4.0 + 1.0 - 4.0 * d * (1.0 - 2.0 * c) / s2 * q * k * (1.0 - r))
        - beta * beta / 4.0
        + 2.0 * d * lambda * st / s2 * normal_pdf(u)
        - 2.0 * d * lambda * lambda / (nbt * s2) * q
}

pub fn predict_l1(config: &ProblemConfig) -> Result<L1Solution> {
    predict_l1_with(config, &TheoryOptions::default())
}

/// `min_tau max_{beta, gamma}` of [`l1_objective`].
pub fn predict_l1_with(config: &ProblemConfig, opts: &TheoryOptions) -> Result<L1Solution> {
    check_config(config)?;
    let n = config.n as f64;
    let saddle = scalar_minimax(
        |o, i| l1_objective(config, o[0], i[0], i[1]),
        &[opts.tau_bound(n)],
        &[opts.beta_bound(n), opts.gamma_bound()],
        &opts.minimax,
    )?;
    let (tau, beta, gamma) = (saddle.outer[0], saddle.inner[0], saddle.inner[1]);
    let st = sigma_tilde(config, tau, gamma);
    let u = config.lambda / (n * beta * tau * st);
    let predicted_sparsity = (2.0 * config.d as f64 * q_function(u)).floor() as u64;
    let degenerate = predicted_sparsity == 0;
    let predicted_error = if degenerate { 0.5 } else { error_from_scalars(gamma, tau, config.n, config.c)? };
    Ok(L1Solution {
        tau,
        beta,
        gamma,
        sigma_tilde: st,
        s: 1.0 / u,
        objective: saddle.value,
        predicted_error,
        predicted_sparsity,
        degenerate,
    })
}
