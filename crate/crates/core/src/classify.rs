//! Classifier evaluation, the oracle classifiers built from the true means,
//! and the sign / top-k compressions of a weight vector.

use ndarray::{Array1, Array2, ArrayView1};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::datagen::Means;
use crate::mathkit::q_function;
use crate::solvers::Weights;
use crate::{Error, Real, Result};

/// Class covariance for the exact error.
#[derive(Debug, Clone, PartialEq)]
pub enum Covariance<T> {
    /// `sigma^2 I`, given by `sigma`.
    Isotropic(T),
    Full(Array2<T>),
}

impl<T: Real> Covariance<T> {
    fn quad_form(&self, w: ArrayView1<'_, T>) -> Result<T> {
        match self {
            Covariance::Isotropic(s) => Ok(*s * *s * w.dot(&w)),
            Covariance::Full(m) => {
                if m.dim() != (w.len(), w.len()) {
                    return Err(Error::DimensionMismatch(format!(
                        "covariance is {:?} but w has length {}",
                        m.dim(),
                        w.len()
                    )));
                }
                Ok(w.dot(&m.dot(&w)))
            }
        }
    }
}

/// Misclassification probability of `x -> sign(w^T x)` on a fresh point:
/// `Q(mu1^T w / sqrt(w^T S1 w)) / 2 + Q(-mu2^T w / sqrt(w^T S2 w)) / 2`.
pub fn error_exact<T: Real>(
    w: &Weights<T>,
    mu1: ArrayView1<'_, T>,
    mu2: ArrayView1<'_, T>,
    cov1: &Covariance<T>,
    cov2: &Covariance<T>,
) -> Result<T> {
    if w.is_zero() {
        return Err(Error::invalid("error of the zero classifier is undefined"));
    }
    if mu1.len() != w.len() || mu2.len() != w.len() {
        return Err(Error::DimensionMismatch("means and weights differ in length".into()));
    }
    let w = w.view();
    let s1 = cov1.quad_form(w)?;
    let s2 = cov2.quad_form(w)?;
    if !(s1 > T::zero() && s2 > T::zero()) {
        return Err(Error::invalid("covariances must be positive definite"));
    }
    let half = T::lit(0.5);
    Ok(half * q_function(mu1.dot(&w) / s1.sqrt()) + half * q_function(-mu2.dot(&w) / s2.sqrt()))
}

/// `error_exact` with both classes `N(mu_i, sigma^2 I)`.
pub fn error_exact_iso<T: Real>(w: &Weights<T>, means: &Means<T>, sigma: T) -> Result<T> {
    let cov = Covariance::Isotropic(sigma);
    error_exact(w, means.mu1.view(), means.mu2.view(), &cov, &cov)
}

/// The two Q-arguments of the isotropic error, `mu1^T w / (sigma ||w||)`
/// and `-mu2^T w / (sigma ||w||)`. Useful where the error itself underflows.
pub fn error_arguments<T: Real>(w: &Weights<T>, means: &Means<T>, sigma: T) -> Result<(T, T)> {
    if w.is_zero() {
        return Err(Error::invalid("error of the zero classifier is undefined"));
    }
    let wv = w.view();
    let s = sigma * wv.dot(&wv).sqrt();
    Ok((means.mu1.dot(&wv) / s, -means.mu2.dot(&wv) / s))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorReport {
    pub exact_error: f64,
    pub mc_error: f64,
    pub mc_samples: usize,
    pub mc_stderr: f64,
}

/// Monte Carlo error over `samples` fresh test points, with the exact value
/// alongside. Under isotropic noise `w^T x` is `w^T mu + sigma ||w|| g` in
/// distribution, so each test point costs O(1) after two dot products.
/// A point is misclassified when `sign(w^T x)` (with `sign(0) = +1`)
/// disagrees with its label.
pub fn error_mc<T: Real>(
    w: &Weights<T>,
    means: &Means<T>,
    sigma: f64,
    samples: usize,
    rng: &mut impl Rng,
) -> Result<ErrorReport> {
    if samples == 0 {
        return Err(Error::invalid("need at least one Monte Carlo sample"));
    }
    let wv = w.view();
    let m1 = means.mu1.dot(&wv).as_f64();
    let m2 = means.mu2.dot(&wv).as_f64();
    let spread = sigma * wv.dot(&wv).as_f64().sqrt();
    let mut wrong = 0usize;
    for _ in 0..samples {
        let first = rng.random_bool(0.5);
        let g: f64 = rng.sample(StandardNormal);
        let score = if first { m1 } else { m2 } + spread * g;
        let predicted_first = score >= 0.0;
        wrong += (predicted_first != first) as usize;
    }
    let p = wrong as f64 / samples as f64;
    let exact_error = if w.is_zero() {
        0.5
    } else {
        error_exact_iso(w, means, T::lit(sigma))?.as_f64()
    };
    Ok(ErrorReport { exact_error, mc_error: p, mc_samples: samples, mc_stderr: (p * (1.0 - p) / samples as f64).sqrt() })
}

/// Monte Carlo error drawing full `d`-dimensional test points; O(d) per point.
pub fn error_mc_full<T: Real>(
    w: &Weights<T>,
    means: &Means<T>,
    sigma: f64,
    samples: usize,
    rng: &mut impl Rng,
) -> Result<f64> {
    if samples == 0 {
        return Err(Error::invalid("need at least one Monte Carlo sample"));
    }
    let mut wrong = 0usize;
    for _ in 0..samples {
        let (x, label) = crate::datagen::sample_test_point(means, sigma, rng);
        let pred = if x.dot(&w.view()) >= T::zero() { T::one() } else { -T::one() };
        wrong += (pred != label) as usize;
    }
    Ok(wrong as f64 / samples as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OracleKind {
    Optimal,
    OneBit,
    /// Top-`k` magnitudes of `mu1 - mu2`.
    KSparse(usize),
}

/// Classifier built from the true means, with its predicted error. The
/// optimal and one-bit predictions use the large-`d` identities
/// `||mu1 - mu2||^2 ~ 2(1-r)d` and `||mu1 - mu2||_1 ~ 2d sqrt((1-r)/pi)`;
/// the k-sparse one is scored with `error_exact`.
pub fn oracle_classifier<T: Real>(kind: OracleKind, means: &Means<T>, r: f64, sigma: f64) -> Result<(Weights<T>, f64)> {
    let diff = &means.mu1 - &means.mu2;
    let d = diff.len() as f64;
    let s2 = sigma * sigma;
    match kind {
        OracleKind::Optimal => Ok((Weights::new(diff)?, q_function((d * (1.0 - r) / (2.0 * s2)).sqrt()))),
        OracleKind::OneBit => {
            let w = compress_sign(&Weights::new(diff)?)?;
            Ok((w, q_function((d * (1.0 - r) / (std::f64::consts::PI * s2)).sqrt())))
        }
        OracleKind::KSparse(k) => {
            let w = sparsify_topk(&Weights::new(diff)?, k)?;
            let e = error_exact_iso(&w, means, T::lit(sigma))?.as_f64();
            Ok((w, e))
        }
    }
}

/// Entrywise sign, with `sign(0) = +1`.
pub fn compress_sign<T: Real>(w: &Weights<T>) -> Result<Weights<T>> {
    if w.is_zero() {
        return Err(Error::invalid("sign compression of the zero vector"));
    }
    Weights::new(w.as_array().mapv(|x| if x < T::zero() { -T::one() } else { T::one() }))
}

/// Sign on the support of `w`: zero entries stay zero. This is the
/// compression that keeps a sparse solution sparse.
pub fn compress_sign_support<T: Real>(w: &Weights<T>) -> Result<Weights<T>> {
    if w.is_zero() {
        return Err(Error::invalid("sign compression of the zero vector"));
    }
    Weights::new(w.as_array().mapv(|x| if x == T::zero() { x } else { x.signum() }))
}

/// Keeps the `k` largest magnitudes (lower index wins ties) and zeroes the
/// rest.
pub fn sparsify_topk<T: Real>(w: &Weights<T>, k: usize) -> Result<Weights<T>> {
    let d = w.len();
    if k == 0 || k > d {
        return Err(Error::invalid(format!("k must lie in 1..={d}, got {k}")));
    }
    let a = w.as_array();
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&i, &j| {
        a[j].abs()
            .partial_cmp(&a[i].abs())
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(i.cmp(&j))
    });
    let mut out = Array1::zeros(d);
    for &i in &order[..k] {
        out[i] = a[i];
    }
    Weights::new(out)
}
