//! Large-λ approximations: the closed-form ridge estimate, the
//! one-variable η programs for ℓ1 and ℓ∞, and the score-based one-bit
//! classifier.

use rand_distr::{Distribution, StandardNormal};

use crate::classify::{compress_sign, error_exact_iso};
use crate::datagen::{stream_rng, GmmInstance, Stream};
use crate::mathkit::q_function;
use crate::solvers::Weights;
use crate::{Error, ProblemConfig, Real, Result};

/// Closed-form ridge scalars for `lambda >> sigma^2 n`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RidgeApprox {
    pub gamma: f64,
    /// Coefficient on the fresh Gaussian direction `a`.
    pub beta_dir: f64,
    pub predicted_error: f64,
    /// `sqrt(d(1-r)) / (sigma sqrt 2)`, the small-noise limit of the
    /// Q-argument.
    pub limit_argument: f64,
}

impl RidgeApprox {
    /// The Q-argument behind `predicted_error`.
    pub fn argument(&self, config: &ProblemConfig) -> f64 {
        let (n, d, r, s) = (config.n as f64, config.d as f64, config.r, config.sigma);
        let a = 1.0 - r + 2.0 * s * s / n;
        d * (1.0 - r) * self.gamma
            / (s * (2.0 * d * a * self.gamma * self.gamma + d * s * s * self.beta_dir * self.beta_dir).sqrt())
    }
}

pub fn ridge_large_lambda(config: &ProblemConfig) -> Result<RidgeApprox> {
    check(config)?;
    let (n, d, c, r, s, lambda) = (config.n as f64, config.d as f64, config.c, config.r, config.sigma, config.lambda);
    let a = 1.0 - r + 2.0 * s * s / n;
    let gamma = (1.0 - 2.0 * c) / (d * a + 2.0 * lambda / n);
    let beta_dir = 2.0 * (n * c * (1.0 - c)).sqrt() / (d * s * s + lambda);
    let mut out = RidgeApprox {
        gamma,
        beta_dir,
        predicted_error: 0.5,
        limit_argument: (d * (1.0 - r)).sqrt() / (s * std::f64::consts::SQRT_2),
    };
    if gamma != 0.0 {
        out.predicted_error = q_function(out.argument(config));
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EtaRegularizer {
    L1,
    LInf,
}

/// Minimizer of a one-variable η program and the scalars it implies.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EtaSolution {
    pub eta: f64,
    pub gamma: f64,
    pub beta: f64,
    pub regularizer: EtaRegularizer,
    /// `F'(eta)`; zero at an interior minimizer, nonnegative when `eta = 0`.
    pub derivative_residual: f64,
    pub objective: f64,
}

/// `F(eta) = lambda^2 eta + a1 / (b1 + k1 eta) + a2 / (1 + k2 eta)` together
/// with the map from `eta` to `(gamma, beta)`.
#[derive(Debug, Clone, Copy)]
struct EtaProgram {
    lambda2: f64,
    a1: f64,
    b1: f64,
    k1: f64,
    a2: f64,
    k2: f64,
    // gamma = -g0 / (1 + kg eta), beta = -h0 / (1 + kh eta)
    g0: f64,
    kg: f64,
    h0: f64,
    kh: f64,
}

impl EtaProgram {
    fn new(config: &ProblemConfig, reg: EtaRegularizer) -> Self {
        let (n, d, c, r, s) = (config.n as f64, config.d as f64, config.c, config.r, config.sigma);
        let a = 1.0 - r + 2.0 * s * s / n;
        let s2 = s * s;
        let lambda2 = config.lambda * config.lambda;
        let g0 = 2.0 * (1.0 - 2.0 * c);
        let h0 = 4.0 * (c * (1.0 - c)).sqrt();
        match reg {
            EtaRegularizer::L1 => {
                let l = (2.0 * d).ln();
                Self {
                    lambda2,
                    a1: n * (1.0 - 2.0 * c).powi(2),
                    b1: 1.0,
                    k1: 4.0 * n * a * l,
                    a2: 4.0 * n * c * (1.0 - c),
                    k2: 8.0 * s2 * l,
                    g0,
                    kg: 4.0 * n * a * l,
                    h0,
                    kh: 8.0 * s2 * l,
                }
            }
            EtaRegularizer::LInf => {
                let l = d * d / std::f64::consts::PI;
                Self {
                    lambda2,
                    a1: n * n * (1.0 - 2.0 * c).powi(2),
                    b1: 2.0,
                    k1: 4.0 * n * n * a * l,
                    a2: 4.0 * n * n * c * (1.0 - c),
                    k2: 8.0 * n * s2 * l,
                    g0,
                    kg: 4.0 * n * a * l,
                    h0,
                    kh: 8.0 * s2 * l,
                }
            }
        }
    }

    fn value(&self, eta: f64) -> f64 {
        self.lambda2 * eta + self.a1 / (self.b1 + self.k1 * eta) + self.a2 / (1.0 + self.k2 * eta)
    }

    fn derivative(&self, eta: f64) -> f64 {
        let u = self.b1 + self.k1 * eta;
        let v = 1.0 + self.k2 * eta;
        self.lambda2 - self.a1 * self.k1 / (u * u) - self.a2 * self.k2 / (v * v)
    }

    fn second_derivative(&self, eta: f64) -> f64 {
        let u = self.b1 + self.k1 * eta;
        let v = 1.0 + self.k2 * eta;
        2.0 * self.a1 * self.k1 * self.k1 / (u * u * u) + 2.0 * self.a2 * self.k2 * self.k2 / (v * v * v)
    }

    /// Size of the terms that cancel in `F'`, for relative residuals.
    fn derivative_scale(&self, eta: f64) -> f64 {
        let u = self.b1 + self.k1 * eta;
        let v = 1.0 + self.k2 * eta;
        self.lambda2 + self.a1 * self.k1 / (u * u) + self.a2 * self.k2 / (v * v)
    }
}

const ETA_LO: f64 = 1e-18;
const ETA_HI: f64 = 1e6;
const GOLDEN_ITERATIONS: usize = 200;
const UNIMODAL_GRID: usize = 400;

pub fn l1_eta_solve(config: &ProblemConfig) -> Result<EtaSolution> {
    eta_solve(config, EtaRegularizer::L1)
}

pub fn linf_eta_solve(config: &ProblemConfig) -> Result<EtaSolution> {
    eta_solve(config, EtaRegularizer::LInf)
}

fn eta_solve(config: &ProblemConfig, reg: EtaRegularizer) -> Result<EtaSolution> {
    check(config)?;
    if !(config.lambda > 0.0) {
        return Err(Error::invalid("the eta program needs lambda > 0"));
    }
    let p = EtaProgram::new(config, reg);
    let finish = |eta: f64| EtaSolution {
        eta,
        gamma: -p.g0 / (1.0 + p.kg * eta),
        beta: -p.h0 / (1.0 + p.kh * eta),
        regularizer: reg,
        derivative_residual: p.derivative(eta),
        objective: p.value(eta),
    };
    // F is convex, so F'(0) >= 0 puts the minimizer at the boundary
    if p.derivative(0.0) >= 0.0 {
        return Ok(finish(0.0));
    }
    check_unimodal(&p)?;
    let (lo, hi) = (ETA_LO.ln(), ETA_HI.ln());
    let f = |s: f64| p.value(s.exp());
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (lo, hi);
    let mut x1 = b - inv_phi * (b - a);
    let mut x2 = a + inv_phi * (b - a);
    let (mut f1, mut f2) = (f(x1), f(x2));
    for _ in 0..GOLDEN_ITERATIONS {
        if b - a <= 1e-14 * (1.0 + a.abs().max(b.abs())) {
            break;
        }
        if f1 <= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - inv_phi * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + inv_phi * (b - a);
            f2 = f(x2);
        }
    }
    let mut eta = ((a + b) / 2.0).exp();
    if eta >= ETA_HI * (1.0 - 1e-6) {
        return Err(Error::numerical("eta minimizer not bracketed below the upper end"));
    }
    // the flat valley leaves golden section short of the root of F'
    for _ in 0..50 {
        let g = p.derivative(eta);
        let h = p.second_derivative(eta);
        if !(h > 0.0) {
            break;
        }
        let next = (eta - g / h).clamp(eta / 10.0, eta * 10.0);
        let done = (next - eta).abs() <= 1e-15 * eta;
        eta = next;
        if done {
            break;
        }
    }
    let sol = finish(eta);
    if !(sol.derivative_residual.abs() <= 1e-6 * (1.0 + p.derivative_scale(eta))) {
        return Err(Error::numerical(format!(
            "eta program not stationary at {eta:e} (F' = {:e})",
            sol.derivative_residual
        )));
    }
    Ok(sol)
}

/// Differences of `F` on a log grid over the bracket change sign at most
/// once, from decreasing to increasing.
fn check_unimodal(p: &EtaProgram) -> Result<()> {
    let (lo, hi) = (ETA_LO.ln(), ETA_HI.ln());
    let vals: Vec<f64> = (0..UNIMODAL_GRID)
        .map(|i| p.value((lo + (hi - lo) * i as f64 / (UNIMODAL_GRID - 1) as f64).exp()))
        .collect();
    let mut rising = false;
    for pair in vals.windows(2) {
        let diff = pair[1] - pair[0];
        let noise = 1e-12 * pair[0].abs().max(pair[1].abs());
        if diff > noise {
            rising = true;
        } else if diff < -noise && rising {
            return Err(Error::numerical("eta objective is not unimodal on the bracket"));
        }
    }
    Ok(())
}

/// `-sign(t)` for the score vector `t = (n/2) gamma (m1 - m2) + sqrt(n) beta a`,
/// with `m1, m2` the empirical class means and `a ~ N(0, sigma^2 I)` drawn
/// from the instance's score stream. Flipped if needed so that its error is
/// at most 1/2.
pub fn build_onebit_from_scores<T: Real>(instance: &GmmInstance<T>, gamma: f64, beta: f64) -> Result<Weights<T>> {
    if !gamma.is_finite() || !beta.is_finite() {
        return Err(Error::invalid("gamma and beta must be finite"));
    }
    let cfg = &instance.config;
    let n = cfg.n as f64;
    let (m1, m2) = instance.class_means();
    let mut rng = stream_rng(cfg.seed, Stream::Scores);
    let coef_m = T::lit(n / 2.0 * gamma);
    let coef_a = n.sqrt() * beta * cfg.sigma;
    let t = ndarray::Zip::from(&m1).and(&m2).map_collect(|&a, &b| {
        let g: f64 = StandardNormal.sample(&mut rng);
        -(coef_m * (a - b) + T::lit(coef_a * g))
    });
    let w = compress_sign(&Weights::new(t)?)?;
    let err = error_exact_iso(&w, &instance.means, T::lit(cfg.sigma))?;
    if err > T::lit(0.5) {
        let flipped = w.into_inner().mapv(|x| -x);
        return Weights::new(flipped);
    }
    Ok(w)
}

fn check(config: &ProblemConfig) -> Result<()> {
    crate::theory::check_config(config)
}
