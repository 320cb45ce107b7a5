use ndarray::{Array2, ArrayView1, ArrayView2};

use super::linalg::{cholesky, cholesky_solve};
use super::{check_dims, Weights};
use crate::{Error, Real, Result};

fn check_lambda<T: Real>(lambda: T) -> Result<()> {
    if lambda > T::zero() && lambda.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid(format!("ridge needs lambda > 0, got {lambda}")))
    }
}

/// Minimizer of `||Xw - z||^2 + lambda ||w||^2` through the `n x n` dual
/// system, `w = X^T (X X^T + lambda I)^{-1} z`.
pub fn solve_ridge<T: Real>(x: ArrayView2<'_, T>, z: ArrayView1<'_, T>, lambda: T) -> Result<Weights<T>> {
    check_dims(&x, &z)?;
    check_lambda(lambda)?;
    let mut k = x.dot(&x.t());
    for i in 0..k.nrows() {
        k[[i, i]] = k[[i, i]] + lambda;
    }
    let l = cholesky(&k)?;
    let alpha = cholesky_solve(&l, z);
    Weights::new(x.t().dot(&alpha))
}

/// Same minimizer through the `d x d` normal equations; for checks on small
/// problems.
pub fn solve_ridge_primal<T: Real>(x: ArrayView2<'_, T>, z: ArrayView1<'_, T>, lambda: T) -> Result<Weights<T>> {
    check_dims(&x, &z)?;
    check_lambda(lambda)?;
    let mut g: Array2<T> = x.t().dot(&x);
    for i in 0..g.nrows() {
        g[[i, i]] = g[[i, i]] + lambda;
    }
    let l = cholesky(&g)?;
    Weights::new(cholesky_solve(&l, x.t().dot(&z).view()))
}
