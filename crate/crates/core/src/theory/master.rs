use super::{check_config, error_from_scalars, error_radicand, scalar_minimax, TheoryOptions};
use crate::mathkit::{gauss_expectation, EnvelopeSpec, PanelRule, QuadratureRule};
use crate::{ProblemConfig, Result};

use super::linf::xi;

/// Saddle of the general separable-regularizer program.
#[derive(Debug, Clone)]
pub struct MasterSolution {
    pub tau: f64,
    pub beta: f64,
    pub gamma: f64,
    pub xi: f64,
    pub objective: f64,
    pub predicted_error: f64,
    pub envelope: EnvelopeSpec<f64>,
    /// The saddle puts `||w||` at zero to working precision; the error is
    /// reported as 1/2.
    pub degenerate: bool,
}

/// How `E e_f(Xi G; t)` is integrated.
#[derive(Debug, Clone)]
pub enum Expectation {
    Hermite(QuadratureRule<f64>),
    /// Panels split at the envelope kinks, for non-smooth envelopes.
    Panels(PanelRule<f64>),
}

impl Expectation {
    /// Gauss–Hermite for smooth envelopes, kink-aligned panels otherwise.
    pub fn for_envelope(envelope: &EnvelopeSpec<f64>) -> Self {
        if envelope.kinks(1.0).is_empty() {
            Expectation::Hermite(QuadratureRule::default())
        } else {
            Expectation::Panels(PanelRule::default())
        }
    }

    pub fn envelope_mean(&self, envelope: &EnvelopeSpec<f64>, xi: f64, t: f64) -> Result<f64> {
        let h = |g: f64| envelope.envelope_unchecked(xi * g, t);
        match self {
            Expectation::Hermite(rule) => gauss_expectation(h, rule),
            Expectation::Panels(rule) => {
                let breaks: Vec<f64> = envelope.kinks(t).iter().map(|k| k / xi).collect();
                rule.expectation(h, &breaks)
            }
        }
    }
}

/// The general min-max objective, with `E e_f(Xi G; lambda/(beta tau n sigma^2))`
/// evaluated by `rule`. Non-finite integrands make the value NaN.
pub fn master_objective(
    config: &ProblemConfig,
    envelope: &EnvelopeSpec<f64>,
    rule: &Expectation,
    tau: f64,
    beta: f64,
    gamma: f64,
) -> f64 {
    let (n, d, c, r) = (config.n as f64, config.d as f64, config.c, config.r);
    let s2 = config.sigma * config.sigma;
    let lambda = config.lambda;
    let x = xi(config, tau, gamma);
    let t = lambda / (beta * tau * n * s2);
    if !(t > 0.0) {
        return f64::NAN;
    }
    let h = gamma / 2.0 - 1.0 + 2.0 * c;
    let e = match rule.envelope_mean(envelope, x, t) {
        Ok(v) => v,
        Err(_) => return f64::NAN,
    };
    beta * tau / 2.0 * (-n / 4.0 * gamma * gamma - n * d * (1.0 - r) / (2.0 * s2) * h * h + n)
        + beta / (2.0 * tau) * (1.0 - d / n)
        - beta * beta / 4.0
        + d * lambda * e
}

pub fn predict_master(config: &ProblemConfig, envelope: &EnvelopeSpec<f64>) -> Result<MasterSolution> {
    predict_master_with(
        config,
        envelope,
        &Expectation::for_envelope(envelope),
        &TheoryOptions::default(),
    )
}

pub fn predict_master_with(
    config: &ProblemConfig,
    envelope: &EnvelopeSpec<f64>,
    rule: &Expectation,
    opts: &TheoryOptions,
) -> Result<MasterSolution> {
    check_config(config)?;
    let n = config.n as f64;
    let saddle = scalar_minimax(
        |o, i| master_objective(config, envelope, rule, o[0], i[0], i[1]),
        &[opts.tau_bound(n)],
        &[opts.beta_bound(n), opts.gamma_bound()],
        &opts.minimax,
    )?;
    let (tau, beta, gamma) = (saddle.outer[0], saddle.inner[0], saddle.inner[1]);
    let rad = error_radicand(gamma, tau, config.n, config.c);
    let degenerate = rad <= 1e-6 / (n * tau * tau);
    let predicted_error =
        if degenerate { 0.5 } else { error_from_scalars(gamma, tau, config.n, config.c)? };
    Ok(MasterSolution {
        tau,
        beta,
        gamma,
        xi: xi(config, tau, gamma),
        objective: saddle.value,
        predicted_error,
        envelope: envelope.clone(),
        degenerate,
    })
}
