use ndarray::{Array1, Array2, ArrayView1, ArrayView2};

use super::linalg::{cholesky, cholesky_solve, mat_t_vec, mat_vec};
use super::{check_dims, objective_value, Regularizer, SolveOutcome, Weights};
use crate::{Error, Real, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdmmOptions {
    pub max_iterations: usize,
    /// Relative primal and dual residual that stops the iteration.
    pub tolerance: f64,
    /// Initial penalty; `lambda` when unset.
    pub rho: Option<f64>,
}

impl Default for AdmmOptions {
    fn default() -> Self {
        Self { max_iterations: 10_000, tolerance: 1e-7, rho: None }
    }
}

/// Solves `(rho I + 2 X^T X) w = b` through the smaller of the two Gram
/// matrices.
struct ShiftedSystem<'a, T> {
    x: ArrayView2<'a, T>,
    gram: Array2<T>,
    wide: bool,
    factor: Array2<T>,
    rho: T,
}

impl<'a, T: Real> ShiftedSystem<'a, T> {
    fn new(x: ArrayView2<'a, T>, rho: T) -> Result<Self> {
        let wide = x.nrows() <= x.ncols();
        let gram = if wide { x.dot(&x.t()) } else { x.t().dot(&x) };
        let factor = Self::factorize(&gram, rho)?;
        Ok(Self { x, gram, wide, factor, rho })
    }

    fn factorize(gram: &Array2<T>, rho: T) -> Result<Array2<T>> {
        let two = T::lit(2.0);
        let mut a = gram.mapv(|g| g * two);
        a.diag_mut().mapv_inplace(|g| g + rho);
        cholesky(&a)
    }

    fn set_rho(&mut self, rho: T) -> Result<()> {
        self.factor = Self::factorize(&self.gram, rho)?;
        self.rho = rho;
        Ok(())
    }

    fn solve(&self, b: &Array1<T>, scratch_n: &mut Array1<T>, out: &mut Array1<T>) {
        if !self.wide {
            out.assign(&cholesky_solve(&self.factor, b.view()));
            return;
        }
        // Woodbury: (b - 2 X^T (rho I + 2 X X^T)^{-1} X b) / rho
        mat_vec(&self.x, b, scratch_n);
        let c = cholesky_solve(&self.factor, scratch_n.view());
        mat_t_vec(&self.x, &c, out);
        let two = T::lit(2.0);
        let inv = T::one() / self.rho;
        out.zip_mut_with(b, |o, &bi| *o = (bi - two * *o) * inv);
    }
}

/// ADMM on `||Xw - z||^2 + lambda f(v)` subject to `w = v`, with the penalty
/// rebalanced whenever the primal and dual residuals drift apart by more
/// than a factor of ten. The returned weights are the `v` iterate, an exact
/// proximal output, so zero and saturated entries are exact.
pub fn solve_admm<T: Real>(
    x: ArrayView2<'_, T>,
    z: ArrayView1<'_, T>,
    lambda: T,
    reg: &Regularizer<T>,
    opts: &AdmmOptions,
) -> Result<SolveOutcome<T>> {
    check_dims(&x, &z)?;
    if opts.max_iterations == 0 || !(opts.tolerance > 0.0) {
        return Err(Error::invalid("ADMM needs a positive iteration cap and tolerance"));
    }
    if !(lambda > T::zero() && lambda.is_finite()) {
        return Err(Error::invalid(format!("ADMM needs lambda > 0, got {lambda}")));
    }
    let (n, d) = x.dim();
    let rho0 = opts.rho.map(T::lit).unwrap_or(lambda);
    if !(rho0 > T::zero() && rho0.is_finite()) {
        return Err(Error::invalid("ADMM penalty must be positive"));
    }
    let tol = T::lit(opts.tolerance);
    let two = T::lit(2.0);
    let ten = T::lit(10.0);
    let mut system = ShiftedSystem::new(x, rho0)?;
    let mut b0 = Array1::<T>::zeros(d);
    mat_t_vec(&x, &z.to_owned(), &mut b0);
    b0.mapv_inplace(|v| v * two);

    let mut v = Array1::<T>::zeros(d);
    let mut u = Array1::<T>::zeros(d);
    let mut w = Array1::<T>::zeros(d);
    let mut b = Array1::<T>::zeros(d);
    let mut scratch = Array1::<T>::zeros(n);
    let mut converged = false;
    let mut iterations = 0;
    while iterations < opts.max_iterations {
        iterations += 1;
        let rho = system.rho;
        b.assign(&b0);
        b.zip_mut_with(&v, |bi, &vi| *bi = *bi + rho * vi);
        b.zip_mut_with(&u, |bi, &ui| *bi = *bi - rho * ui);
        system.solve(&b, &mut scratch, &mut w);
        let v_new = reg.prox((&w + &u).view(), lambda / rho)?;
        let primal = (&w - &v_new).mapv(|a| a * a).sum().sqrt();
        let dual = rho * (&v_new - &v).mapv(|a| a * a).sum().sqrt();
        u = &u + &w - &v_new;
        v = v_new;
        if !primal.is_finite() || !dual.is_finite() {
            return Err(Error::numerical(format!("ADMM diverged at iteration {iterations}")));
        }
        let scale_p = w.dot(&w).sqrt().max(v.dot(&v).sqrt());
        let scale_d = rho * u.dot(&u).sqrt();
        if primal <= tol * scale_p && dual <= tol * scale_d {
            converged = true;
            break;
        }
        if iterations % 10 == 0 && scale_p > T::zero() && scale_d > T::zero() {
            let (rp, rd) = (primal / scale_p, dual / scale_d);
            if rp > ten * rd {
                system.set_rho(rho * two)?;
                u.mapv_inplace(|a| a / two);
            } else if rd > ten * rp {
                system.set_rho(rho / two)?;
                u.mapv_inplace(|a| a * two);
            }
        }
    }
    let objective = objective_value(x, z, lambda, reg, v.view())?;
    Ok(SolveOutcome {
        weights: Weights::new(v)?,
        objective,
        iterations,
        converged,
        lipschitz: system.rho,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::datagen::{GmmInstance, ProblemConfig};
    use crate::solvers::{solve_prox, solve_ridge, SolveOptions};

    fn instance(n: usize, d: usize, seed: u64) -> GmmInstance<f64> {
        GmmInstance::sample(&ProblemConfig { n, d, c: 0.2, r: 0.8, sigma: 2.0, lambda: 1.0, seed }).unwrap()
    }

    #[test]
    fn matches_ridge_closed_form() {
        let inst = instance(16, 40, 2);
        let exact = solve_ridge(inst.x.view(), inst.z.view(), 3.0).unwrap();
        let opts = AdmmOptions { max_iterations: 20_000, tolerance: 1e-12, rho: None };
        let out = solve_admm(inst.x.view(), inst.z.view(), 3.0, &Regularizer::L2Squared, &opts).unwrap();
        assert!(out.converged);
        let err = (out.weights.as_array() - exact.as_array()).mapv(f64::abs).fold(0.0f64, |m, &v| m.max(v));
        assert!(err < 1e-8, "{err}");
    }

    #[test]
    fn tall_system_agrees_with_fista() {
        // n > d takes the direct d x d factorization
        let x = ndarray::Array2::from_shape_fn((60, 20), |(i, j)| ((i * 20 + j) as f64 * 0.731).sin());
        let z = ndarray::Array1::from_shape_fn(60, |i| if (i * 7) % 3 == 0 { 1.0 } else { -1.0 });
        for reg in [Regularizer::L1, Regularizer::LInf] {
            let opts = AdmmOptions { max_iterations: 50_000, tolerance: 1e-11, rho: None };
            let a = solve_admm(x.view(), z.view(), 4.0, &reg, &opts).unwrap();
            let f = solve_prox(x.view(), z.view(), 4.0, &reg, &SolveOptions::default()).unwrap();
            assert!((a.objective - f.objective).abs() <= 1e-7 * f.objective, "{reg:?}: {} vs {}", a.objective, f.objective);
        }
    }

    #[test]
    fn rejects_bad_input() {
        let inst = instance(6, 8, 0);
        let o = AdmmOptions::default();
        assert!(solve_admm(inst.x.view(), inst.z.view(), 0.0, &Regularizer::L1, &o).is_err());
        let bad = AdmmOptions { tolerance: 0.0, ..o };
        assert!(solve_admm(inst.x.view(), inst.z.view(), 1.0, &Regularizer::L1, &bad).is_err());
        let short = inst.z.slice(ndarray::s![..4]);
        assert!(solve_admm(inst.x.view(), short, 1.0, &Regularizer::L1, &o).is_err());
    }
}
