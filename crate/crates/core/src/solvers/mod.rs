//! Solvers for `min_w ||Xw - z||^2 + lambda f(w)`.

mod admm;
mod fista;
mod linalg;
mod ridge;

use std::fmt;
use std::sync::Arc;

use ndarray::{Array1, ArrayView1, ArrayView2};

use crate::mathkit::{prox_linf, soft_threshold, ScalarPenalty};
use crate::{Error, Real, Result};

pub use admm::{solve_admm, AdmmOptions};
pub use fista::{lipschitz_estimate, solve_linf, solve_prox, solve_prox_from, solve_warm_started};
pub use ridge::{solve_ridge, solve_ridge_primal};

/// Classifier weight vector with finite entries.
#[derive(Debug, Clone, PartialEq)]
pub struct Weights<T>(Array1<T>);

impl<T: Real> Weights<T> {
    pub fn new(w: Array1<T>) -> Result<Self> {
        if let Some(i) = w.iter().position(|x| !x.is_finite()) {
            return Err(Error::numerical(format!("weight entry {i} is not finite")));
        }
        Ok(Self(w))
    }

    pub fn zeros(d: usize) -> Self {
        Self(Array1::zeros(d))
    }

    pub fn view(&self) -> ArrayView1<'_, T> {
        self.0.view()
    }

    pub fn as_array(&self) -> &Array1<T> {
        &self.0
    }

    pub fn into_inner(self) -> Array1<T> {
        self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|x| *x == T::zero())
    }

    pub fn norm_inf(&self) -> T {
        self.0.iter().fold(T::zero(), |m, x| m.max(x.abs()))
    }

    /// Entries with magnitude above `1e-6 ||w||_inf`.
    pub fn nnz(&self) -> usize {
        let thr = self.norm_inf() * T::lit(1e-6);
        self.0.iter().filter(|x| x.abs() > thr).count()
    }

    /// Entries within `1e-6 ||w||_inf` of `±||w||_inf`.
    pub fn bound_count(&self) -> usize {
        let m = self.norm_inf();
        if m == T::zero() {
            return 0;
        }
        let thr = m * T::lit(1e-6);
        self.0.iter().filter(|x| m - x.abs() <= thr).count()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StepRule {
    /// Start from the power-iteration Lipschitz estimate and double it
    /// whenever the quadratic upper bound fails.
    LipschitzBacktracking,
    /// Use the estimate as is.
    Fixed,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveOptions {
    pub max_iterations: usize,
    /// Relative objective decrease that stops the iteration.
    pub tolerance: f64,
    pub step_rule: StepRule,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self { max_iterations: 50_000, tolerance: 1e-9, step_rule: StepRule::LipschitzBacktracking }
    }
}

impl SolveOptions {
    pub fn validate(&self) -> Result<()> {
        if !(self.tolerance > 0.0) {
            return Err(Error::invalid("tolerance must be positive"));
        }
        if self.max_iterations == 0 {
            return Err(Error::invalid("max_iterations must be positive"));
        }
        Ok(())
    }
}

/// The penalty `f` of the training problem.
#[derive(Clone)]
pub enum Regularizer<T = f64> {
    L2Squared,
    L1,
    LInf,
    /// `sum_i p(w_i)` for a scalar penalty `p`.
    Separable(Arc<dyn ScalarPenalty<T>>),
}

impl<T> fmt::Debug for Regularizer<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Regularizer::L2Squared => "L2Squared",
            Regularizer::L1 => "L1",
            Regularizer::LInf => "LInf",
            Regularizer::Separable(_) => "Separable(..)",
        })
    }
}

impl<T: Real> Regularizer<T> {
    pub fn value(&self, w: ArrayView1<'_, T>) -> T {
        match self {
            Regularizer::L2Squared => w.dot(&w),
            Regularizer::L1 => w.iter().fold(T::zero(), |a, x| a + x.abs()),
            Regularizer::LInf => w.iter().fold(T::zero(), |a, x| a.max(x.abs())),
            Regularizer::Separable(p) => w.iter().fold(T::zero(), |a, &x| a + p.value(x)),
        }
    }

    /// `argmin_u ||v - u||^2 / 2 + t f(u)`.
    pub fn prox(&self, v: ArrayView1<'_, T>, t: T) -> Result<Array1<T>> {
        if !(t > T::zero()) {
            return Err(Error::invalid(format!("prox parameter must be positive, got {t}")));
        }
        Ok(match self {
            Regularizer::L2Squared => {
                let s = T::one() / (T::one() + t + t);
                v.mapv(|x| x * s)
            }
            Regularizer::L1 => v.mapv(|x| soft_threshold(x, t)),
            Regularizer::LInf => prox_linf(v, t)?,
            Regularizer::Separable(p) => v.mapv(|x| p.prox(x, t)),
        })
    }
}

/// Result of an iterative solve.
#[derive(Debug, Clone)]
pub struct SolveOutcome<T> {
    pub weights: Weights<T>,
    pub objective: T,
    pub iterations: usize,
    pub converged: bool,
    /// Final step constant `L` (after any backtracking).
    pub lipschitz: T,
}

fn check_dims<T>(x: &ArrayView2<'_, T>, z: &ArrayView1<'_, T>) -> Result<()> {
    if x.nrows() != z.len() {
        return Err(Error::DimensionMismatch(format!(
            "X has {} rows but z has length {}",
            x.nrows(),
            z.len()
        )));
    }
    Ok(())
}

/// `||Xw - z||^2 + lambda f(w)`.
pub fn objective_value<T: Real>(
    x: ArrayView2<'_, T>,
    z: ArrayView1<'_, T>,
    lambda: T,
    f: &Regularizer<T>,
    w: ArrayView1<'_, T>,
) -> Result<T> {
    check_dims(&x, &z)?;
    if x.ncols() != w.len() {
        return Err(Error::DimensionMismatch(format!(
            "X has {} columns but w has length {}",
            x.ncols(),
            w.len()
        )));
    }
    let r = x.dot(&w) - z;
    Ok(r.dot(&r) + lambda * f.value(w))
}
