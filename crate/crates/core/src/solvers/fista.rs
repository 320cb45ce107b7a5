use ndarray::{Array1, ArrayView1, ArrayView2};

use super::linalg::{mat_t_vec, mat_vec};
use super::admm::{solve_admm, AdmmOptions};
use super::{check_dims, Regularizer, SolveOptions, SolveOutcome, StepRule, Weights};
use crate::{Error, Real, Result};

/// `2 sigma_max(X)^2`, by power iteration on the smaller of `X X^T` and
/// `X^T X`.
pub fn lipschitz_estimate<T: Real>(x: ArrayView2<'_, T>) -> Result<T> {
    let (n, d) = x.dim();
    if n == 0 || d == 0 || x.iter().all(|v| *v == T::zero()) {
        return Err(Error::invalid("Lipschitz estimate of a zero matrix"));
    }
    let small = n.min(d);
    let mut v = Array1::from_shape_fn(small, |i| T::lit(1.0 + 0.5 * (i as f64 * 0.7).sin()));
    let mut mid = Array1::zeros(n.max(d));
    let mut next = Array1::zeros(small);
    let mut est = T::zero();
    for _ in 0..10_000 {
        let norm = v.dot(&v).sqrt();
        v.mapv_inplace(|a| a / norm);
        if n <= d {
            mat_t_vec(&x, &v, &mut mid);
            mat_vec(&x, &mid, &mut next);
        } else {
            mat_vec(&x, &v, &mut mid);
            mat_t_vec(&x, &mid, &mut next);
        }
        let new = v.dot(&next);
        std::mem::swap(&mut v, &mut next);
        if (new - est).abs() <= T::lit(1e-12) * new {
            est = new;
            break;
        }
        est = new;
    }
    Ok(est + est)
}

/// Accelerated proximal gradient on `||Xw - z||^2 + lambda f(w)`, with
/// restart whenever the objective would increase. The iterate sequence is
/// therefore monotone and the last iterate is the best one.
pub fn solve_prox<T: Real>(
    x: ArrayView2<'_, T>,
    z: ArrayView1<'_, T>,
    lambda: T,
    reg: &Regularizer<T>,
    opts: &SolveOptions,
) -> Result<SolveOutcome<T>> {
    solve_prox_from(x, z, lambda, reg, opts, None)
}

/// [`solve_prox`] started from `start` instead of zero.
pub fn solve_prox_from<T: Real>(
    x: ArrayView2<'_, T>,
    z: ArrayView1<'_, T>,
    lambda: T,
    reg: &Regularizer<T>,
    opts: &SolveOptions,
    start: Option<ArrayView1<'_, T>>,
) -> Result<SolveOutcome<T>> {
    check_dims(&x, &z)?;
    opts.validate()?;
    if !(lambda >= T::zero() && lambda.is_finite()) {
        return Err(Error::invalid(format!("lambda must be nonnegative, got {lambda}")));
    }
    let (n, d) = x.dim();
    let z = z.to_owned();
    let tol = T::lit(opts.tolerance);
    let two = T::lit(2.0);
    let mut lip = lipschitz_estimate(x)?;

    let mut w = match start {
        Some(s) if s.len() != d => {
            return Err(Error::DimensionMismatch(format!(
                "start has length {} but X has {d} columns",
                s.len()
            )))
        }
        Some(s) if s.iter().any(|v| !v.is_finite()) => {
            return Err(Error::invalid("start point must be finite"))
        }
        Some(s) => s.to_owned(),
        None => Array1::<T>::zeros(d),
    };
    let mut xw = Array1::<T>::zeros(n);
    mat_vec(&x, &w, &mut xw);
    let mut y = w.clone();
    let mut xy = xw.clone();
    let mut theta = T::one();
    let r0 = &xw - &z;
    let mut f_w = r0.dot(&r0) + lambda * reg.value(w.view());

    let mut grad = Array1::<T>::zeros(d);
    let mut step = Array1::<T>::zeros(d);
    let mut xwn = Array1::<T>::zeros(n);
    let mut converged = false;
    let mut restarted = false;
    let mut iterations = 0;

    while iterations < opts.max_iterations {
        iterations += 1;
        let ry = &xy - &z;
        mat_t_vec(&x, &ry, &mut grad);
        grad.mapv_inplace(|g| g * two);
        let mut doublings = 0;
        let (wn, g_new) = loop {
            step.zip_mut_with(&y, |s, &yi| *s = yi);
            step.scaled_add(-T::one() / lip, &grad);
            let wn = reg.prox(step.view(), lambda / lip)?;
            mat_vec(&x, &wn, &mut xwn);
            let rn = &xwn - &z;
            let g_new = rn.dot(&rn);
            if opts.step_rule == StepRule::Fixed {
                break (wn, g_new);
            }
            let diff = &wn - &y;
            let g_y = ry.dot(&ry);
            let bound = g_y + grad.dot(&diff) + lip * diff.dot(&diff) / two;
            let slack = T::lit(64.0) * T::epsilon() * (g_y + bound.abs());
            if g_new <= bound + slack || doublings == 60 {
                break (wn, g_new);
            }
            doublings += 1;
            lip = lip + lip;
        };
        let f_new = g_new + lambda * reg.value(wn.view());
        if !f_new.is_finite() {
            return Err(Error::numerical(format!("objective became non-finite at iteration {iterations}")));
        }
        if f_new > f_w {
            if restarted {
                // even a plain proximal step fails to descend: stuck at rounding level
                converged = true;
                break;
            }
            restarted = true;
            theta = T::one();
            y.assign(&w);
            xy.assign(&xw);
            continue;
        }
        restarted = false;
        let theta_n = (T::one() + (T::one() + T::lit(4.0) * theta * theta).sqrt()) / two;
        let mom = (theta - T::one()) / theta_n;
        y = &wn + &((&wn - &w) * mom);
        xy = &xwn + &((&xwn - &xw) * mom);
        let decrease = f_w - f_new;
        debug_assert!(decrease >= T::zero());
        w = wn;
        xw.assign(&xwn);
        f_w = f_new;
        theta = theta_n;
        if iterations > 10 && decrease <= tol * f_w.abs().max(T::one()) {
            converged = true;
            break;
        }
    }
    Ok(SolveOutcome { weights: Weights::new(w)?, objective: f_w, iterations, converged, lipschitz: lip })
}

/// [`solve_prox`] warm-started from a short ADMM run. Plain proximal
/// gradient identifies the zero or saturated set very slowly when `lambda`
/// is small; ADMM with an exact Woodbury step finds it in a few thousand
/// iterations, and the proximal-gradient phase then certifies the stopping
/// rule of [`SolveOptions`].
pub fn solve_warm_started<T: Real>(
    x: ArrayView2<'_, T>,
    z: ArrayView1<'_, T>,
    lambda: T,
    reg: &Regularizer<T>,
    opts: &SolveOptions,
) -> Result<SolveOutcome<T>> {
    if !(lambda > T::zero()) {
        return solve_prox(x, z, lambda, reg, opts);
    }
    let warm = solve_admm(x, z, lambda, reg, &AdmmOptions::default())?;
    let start = warm.weights.into_inner();
    let mut out = solve_prox_from(x, z, lambda, reg, opts, Some(start.view()))?;
    out.iterations += warm.iterations;
    Ok(out)
}

/// [`solve_warm_started`] with `f = ||.||_inf`.
pub fn solve_linf<T: Real>(
    x: ArrayView2<'_, T>,
    z: ArrayView1<'_, T>,
    lambda: T,
    opts: &SolveOptions,
) -> Result<SolveOutcome<T>> {
    solve_warm_started(x, z, lambda, &Regularizer::LInf, opts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::datagen::{GmmInstance, ProblemConfig};
    use crate::solvers::{objective_value, solve_ridge};
    use ndarray::{array, Array2};

    fn instance(n: usize, d: usize, seed: u64) -> GmmInstance<f64> {
        GmmInstance::sample(&ProblemConfig { n, d, c: 0.2, r: 0.8, sigma: 2.0, lambda: 1.0, seed }).unwrap()
    }

    fn tiny(seed: u64) -> (Array2<f64>, Array1<f64>) {
        let a = 0.37 + seed as f64;
        let x = Array2::from_shape_fn((3, 4), |(i, j)| ((i * 4 + j) as f64 * a).sin() * 1.5);
        (x, array![1.0, -1.0, 1.0])
    }

    #[test]
    fn lipschitz_matches_svd_bound() {
        let x = array![[3.0f64, 0.0, 0.0], [0.0, 1.0, 0.0]];
        assert!((lipschitz_estimate(x.view()).unwrap() - 18.0).abs() < 1e-9);
        let tall = x.t().to_owned();
        assert!((lipschitz_estimate(tall.view()).unwrap() - 18.0).abs() < 1e-9);
        assert!(lipschitz_estimate(Array2::<f64>::zeros((2, 3)).view()).is_err());
    }

    #[test]
    fn lipschitz_vs_rayleigh_oracle() {
        // Top eigenvalue of a 2x2 Gram matrix in closed form.
        let x = array![[1.0f64, 2.0, 0.5, -1.0], [0.3, -0.7, 2.0, 1.0]];
        let g = x.dot(&x.t());
        let (a, b, c) = (g[[0, 0]], g[[0, 1]], g[[1, 1]]);
        let top = 0.5 * (a + c) + (0.25 * (a - c) * (a - c) + b * b).sqrt();
        let est = lipschitz_estimate(x.view()).unwrap();
        assert!(((est - 2.0 * top) / (2.0 * top)).abs() < 1e-4);
    }

    #[test]
    fn l1_zero_above_threshold() {
        let inst = instance(20, 40, 3);
        let thr = 2.0 * inst.x.t().dot(&inst.z).mapv(f64::abs).fold(0.0f64, |m, &v| m.max(v));
        let out = solve_prox(inst.x.view(), inst.z.view(), thr * 1.0001, &Regularizer::L1, &SolveOptions::default()).unwrap();
        assert!(out.weights.is_zero());
        assert!(out.converged);
    }

    #[test]
    fn quadratic_prox_matches_ridge() {
        for seed in 0..3 {
            let inst = instance(6, 12, seed);
            let (x, z) = (inst.x.slice(ndarray::s![..5, ..]).to_owned(), inst.z.slice(ndarray::s![..5]).to_owned());
            let lambda = 2.0;
            let a = solve_ridge(x.view(), z.view(), lambda).unwrap();
            let opts = SolveOptions { tolerance: 1e-15, max_iterations: 200_000, ..Default::default() };
            let b = solve_prox(x.view(), z.view(), lambda, &Regularizer::L2Squared, &opts).unwrap();
            let diff = (a.as_array() - b.weights.as_array()).mapv(f64::abs).fold(0.0f64, |m, &v| m.max(v));
            assert!(diff < 1e-6, "seed {seed}: {diff}");
        }
    }

    /// Cyclic coordinate descent with exact soft-threshold updates.
    fn coordinate_descent_l1(x: &Array2<f64>, z: &Array1<f64>, lambda: f64) -> Array1<f64> {
        let d = x.ncols();
        let mut w = Array1::zeros(d);
        for _ in 0..200_000 {
            let mut change = 0.0f64;
            for j in 0..d {
                let col = x.column(j);
                let r = z - &x.dot(&w) + &(&col * w[j]);
                let rho = col.dot(&r);
                let nrm = col.dot(&col);
                let new = crate::mathkit::soft_threshold(rho, lambda / 2.0) / nrm;
                change = change.max((new - w[j]).abs());
                w[j] = new;
            }
            if change < 1e-14 {
                break;
            }
        }
        w
    }

    #[test]
    fn l1_matches_coordinate_descent() {
        for seed in 0..3 {
            let (x, z) = tiny(seed);
            for lambda in [0.05, 0.5, 2.0] {
                let cd = coordinate_descent_l1(&x, &z, lambda);
                let f_cd = objective_value(x.view(), z.view(), lambda, &Regularizer::L1, cd.view()).unwrap();
                let out = solve_prox(x.view(), z.view(), lambda, &Regularizer::L1, &SolveOptions::default()).unwrap();
                assert!((out.objective - f_cd).abs() < 1e-6, "{seed} {lambda}: {} vs {f_cd}", out.objective);
            }
        }
    }

    #[test]
    fn linf_matches_grid_search() {
        let (x, z) = tiny(1);
        let lambda = 0.8;
        let out = solve_linf(x.view(), z.view(), lambda, &SolveOptions::default()).unwrap();
        // coarse 4-D grid, then a fine grid around the coarse winner
        let eval = |w: &Array1<f64>| objective_value(x.view(), z.view(), lambda, &Regularizer::LInf, w.view()).unwrap();
        let mut centre = Array1::<f64>::zeros(4);
        let mut half = 2.0;
        let mut best = eval(&centre);
        for _ in 0..12 {
            let steps = 10;
            let base = centre.clone();
            for idx in 0..(steps + 1usize).pow(4) {
                let mut k = idx;
                let mut w = base.clone();
                for j in 0..4 {
                    w[j] += -half + 2.0 * half * (k % (steps + 1)) as f64 / steps as f64;
                    k /= steps + 1;
                }
                let v = eval(&w);
                if v < best {
                    best = v;
                    centre = w;
                }
            }
            half /= 3.0;
        }
        assert!((out.objective - best).abs() < 1e-4, "{} vs {best}", out.objective);
    }

    #[test]
    fn linf_huge_lambda_is_zero() {
        let inst = instance(10, 20, 5);
        let out = solve_linf(inst.x.view(), inst.z.view(), 1e9, &SolveOptions::default()).unwrap();
        assert!(out.weights.is_zero());
    }

    #[test]
    fn linf_saturates_a_subset() {
        let inst = instance(20, 60, 7);
        let opts = SolveOptions { tolerance: 1e-12, max_iterations: 200_000, ..Default::default() };
        let out = solve_linf(inst.x.view(), inst.z.view(), 5.0, &opts).unwrap();
        let k = out.weights.bound_count();
        assert!(k > 1 && k < 60, "{k}");
    }

    #[test]
    fn fixed_point_optimality() {
        let inst = instance(20, 60, 8);
        for reg in [Regularizer::L1, Regularizer::LInf, Regularizer::L2Squared] {
            let lambda = 3.0;
            let opts = SolveOptions { tolerance: 1e-13, max_iterations: 200_000, ..Default::default() };
            let out = solve_prox(inst.x.view(), inst.z.view(), lambda, &reg, &opts).unwrap();
            let w = out.weights.as_array();
            let l = out.lipschitz;
            let grad = inst.x.t().dot(&(inst.x.dot(w) - &inst.z)) * 2.0;
            let p = reg.prox((w - &(grad / l)).view(), lambda / l).unwrap();
            let gap = (&p - w).mapv(f64::abs).fold(0.0f64, |m, &v| m.max(v));
            assert!(gap <= 1e-5 * (1.0 + out.weights.norm_inf()), "{reg:?}: {gap}");
        }
    }

    #[test]
    fn deterministic_and_f32() {
        let inst = instance(20, 40, 2);
        let a = solve_prox(inst.x.view(), inst.z.view(), 1.0, &Regularizer::L1, &SolveOptions::default()).unwrap();
        let b = solve_prox(inst.x.view(), inst.z.view(), 1.0, &Regularizer::L1, &SolveOptions::default()).unwrap();
        assert_eq!(a.weights, b.weights);
        let x32 = inst.x.mapv(|v| v as f32);
        let z32 = inst.z.mapv(|v| v as f32);
        let opts = SolveOptions { tolerance: 1e-6, ..Default::default() };
        let c = solve_prox(x32.view(), z32.view(), 1.0f32, &Regularizer::L1, &opts).unwrap();
        assert!(((c.objective as f64) - a.objective).abs() < 1e-3 * a.objective);
    }

    #[test]
    fn iteration_cap_flags_nonconvergence() {
        let inst = instance(20, 40, 2);
        let opts = SolveOptions { max_iterations: 3, ..Default::default() };
        let out = solve_prox(inst.x.view(), inst.z.view(), 1.0, &Regularizer::LInf, &opts).unwrap();
        assert!(!out.converged);
        assert_eq!(out.iterations, 3);
    }

    #[test]
    fn warm_start_matches_cold_start() {
        let inst = instance(30, 90, 4);
        for reg in [Regularizer::L1, Regularizer::LInf] {
            let cold_opts = SolveOptions { max_iterations: 400_000, tolerance: 1e-14, ..Default::default() };
            let cold = solve_prox(inst.x.view(), inst.z.view(), 2.0, &reg, &cold_opts).unwrap();
            let warm = solve_warm_started(inst.x.view(), inst.z.view(), 2.0, &reg, &SolveOptions::default()).unwrap();
            assert!(warm.converged);
            assert!(warm.objective <= cold.objective * (1.0 + 1e-5), "{reg:?}: {} vs {}", warm.objective, cold.objective);
        }
    }

    #[test]
    fn start_point_is_validated() {
        let inst = instance(6, 8, 1);
        let bad = Array1::from_elem(7, 0.0);
        let o = SolveOptions::default();
        assert!(solve_prox_from(inst.x.view(), inst.z.view(), 1.0, &Regularizer::L1, &o, Some(bad.view())).is_err());
        let nan = Array1::from_elem(8, f64::NAN);
        assert!(solve_prox_from(inst.x.view(), inst.z.view(), 1.0, &Regularizer::L1, &o, Some(nan.view())).is_err());
    }
}
