//! Derivative-free building blocks for the scalar programs: Nelder–Mead,
//! Brent's 1-D minimizer, and the grid-then-refine min-max driver.

use crate::{Error, Result};

fn sanitize(v: f64) -> f64 {
    if v.is_nan() {
        f64::INFINITY
    } else {
        v
    }
}

/// Nelder–Mead minimization from `x0` with initial simplex edges `step`.
/// NaN values count as `+inf`, so infeasible regions simply repel the
/// simplex.
pub fn nelder_mead(
    f: &mut dyn FnMut(&[f64]) -> f64,
    x0: &[f64],
    step: &[f64],
    xtol: f64,
    ftol: f64,
    max_evals: usize,
) -> (Vec<f64>, f64, usize) {
    let m = x0.len();
    let mut evals = 0;
    let mut eval = |x: &[f64], evals: &mut usize| {
        *evals += 1;
        sanitize(f(x))
    };
    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(m + 1);
    simplex.push((x0.to_vec(), eval(x0, &mut evals)));
    for i in 0..m {
        let mut x = x0.to_vec();
        x[i] += step[i];
        let fx = eval(&x, &mut evals);
        simplex.push((x, fx));
    }
    let point = |c: &[f64], t: &[f64], a: f64| -> Vec<f64> { c.iter().zip(t).map(|(ci, ti)| ci + a * (ti - ci)).collect() };
    while evals < max_evals {
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        let best = simplex[0].1;
        let worst = simplex[m].1;
        let size = simplex[1..]
            .iter()
            .flat_map(|(x, _)| x.iter().zip(&simplex[0].0).map(|(a, b)| (a - b).abs()))
            .fold(0.0f64, f64::max);
        if size <= xtol && (worst - best).abs() <= ftol * (best.abs() + 1e-300) {
            break;
        }
        if size <= 1e-3 * xtol {
            break;
        }
        let mut centroid = vec![0.0; m];
        for (x, _) in &simplex[..m] {
            for (c, xi) in centroid.iter_mut().zip(x) {
                *c += xi / m as f64;
            }
        }
        let xw = simplex[m].0.clone();
        let xr = point(&centroid, &xw, -1.0);
        let fr = eval(&xr, &mut evals);
        if fr < best {
            let xe = point(&centroid, &xw, -2.0);
            let fe = eval(&xe, &mut evals);
            simplex[m] = if fe < fr { (xe, fe) } else { (xr, fr) };
        } else if fr < simplex[m - 1].1 {
            simplex[m] = (xr, fr);
        } else {
            let (xc, fc) = if fr < worst {
                let xc = point(&centroid, &xr, 0.5);
                let fc = eval(&xc, &mut evals);
                (xc, fc)
            } else {
                let xc = point(&centroid, &xw, 0.5);
                let fc = eval(&xc, &mut evals);
                (xc, fc)
            };
            if fc < worst.min(fr) {
                simplex[m] = (xc, fc);
            } else {
                let x0 = simplex[0].0.clone();
                for entry in simplex.iter_mut().skip(1) {
                    let x = point(&x0, &entry.0, 0.5);
                    let fx = eval(&x, &mut evals);
                    *entry = (x, fx);
                }
            }
        }
    }
    simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
    let (x, fx) = simplex.swap_remove(0);
    (x, fx, evals)
}

/// Brent's method on `[lo, hi]`; returns `(x, f(x))`.
pub fn brent_min(f: &mut dyn FnMut(f64) -> f64, lo: f64, hi: f64, tol: f64, max_iter: usize) -> (f64, f64) {
    const CGOLD: f64 = 0.381_966_011_250_105_1;
    let (mut a, mut b) = (lo.min(hi), lo.max(hi));
    let mut x = a + CGOLD * (b - a);
    let (mut w, mut v) = (x, x);
    let mut fx = sanitize(f(x));
    let (mut fw, mut fv) = (fx, fx);
    let (mut d, mut e) = (0.0f64, 0.0f64);
    for _ in 0..max_iter {
        let xm = 0.5 * (a + b);
        let tol1 = tol * x.abs() + 1e-300;
        let tol2 = 2.0 * tol1;
        if (x - xm).abs() <= tol2 - 0.5 * (b - a) {
            break;
        }
        let mut golden = true;
        if e.abs() > tol1 {
            let r = (x - w) * (fx - fv);
            let mut q = (x - v) * (fx - fw);
            let mut p = (x - v) * q - (x - w) * r;
            q = 2.0 * (q - r);
            if q > 0.0 {
                p = -p;
            }
            q = q.abs();
            let etemp = e;
            e = d;
            if p.abs() < (0.5 * q * etemp).abs() && p > q * (a - x) && p < q * (b - x) {
                d = p / q;
                let u = x + d;
                if u - a < tol2 || b - u < tol2 {
                    d = tol1.copysign(xm - x);
                }
                golden = false;
            }
        }
        if golden {
            e = if x >= xm { a - x } else { b - x };
            d = CGOLD * e;
        }
        let u = if d.abs() >= tol1 { x + d } else { x + tol1.copysign(d) };
        let fu = sanitize(f(u));
        if fu <= fx {
            if u >= x {
                a = x;
            } else {
                b = x;
            }
            v = w;
            fv = fw;
            w = x;
            fw = fx;
            x = u;
            fx = fu;
        } else {
            if u < x {
                a = u;
            } else {
                b = u;
            }
            if fu <= fw || w == x {
                v = w;
                fv = fw;
                w = u;
                fw = fu;
            } else if fu <= fv || v == x || v == w {
                v = u;
                fv = fu;
            }
        }
    }
    (x, fx)
}

/// One scalar variable of a box; `log` variables are searched in log space
/// and must have `lo > 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bound {
    pub lo: f64,
    pub hi: f64,
    pub log: bool,
}

impl Bound {
    pub fn linear(lo: f64, hi: f64) -> Self {
        Self { lo, hi, log: false }
    }

    pub fn log(lo: f64, hi: f64) -> Self {
        Self { lo, hi, log: true }
    }

    fn validate(&self) -> Result<()> {
        if !(self.lo < self.hi) || !self.lo.is_finite() || !self.hi.is_finite() || (self.log && self.lo <= 0.0) {
            return Err(Error::invalid(format!("bad search interval {self:?}")));
        }
        Ok(())
    }

    fn to_u(&self, x: f64) -> f64 {
        if self.log {
            x.ln()
        } else {
            x
        }
    }

    fn from_u(&self, u: f64) -> f64 {
        if self.log {
            u.exp()
        } else {
            u
        }
    }

    fn u_range(&self) -> (f64, f64) {
        (self.to_u(self.lo), self.to_u(self.hi))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MinimaxOptions {
    /// Grid points per outer dimension.
    pub outer_points: usize,
    /// Inner multistart count (spread as a product grid over the inner box).
    pub inner_starts: usize,
    pub refine_rounds: usize,
    /// Each refinement round shrinks the outer window by this factor.
    pub shrink: f64,
    /// Final Nelder–Mead pass on the outer value function.
    pub polish: bool,
    pub inner_xtol: f64,
    pub inner_ftol: f64,
    pub inner_max_evals: usize,
    /// Relative distance (in search coordinates) below which a solution
    /// counts as sitting on a box face.
    pub face_tol: f64,
}

impl Default for MinimaxOptions {
    fn default() -> Self {
        Self {
            outer_points: 200,
            inner_starts: 9,
            refine_rounds: 2,
            shrink: 10.0,
            polish: true,
            inner_xtol: 1e-10,
            inner_ftol: 1e-14,
            inner_max_evals: 4000,
            face_tol: 1e-6,
        }
    }
}

/// A saddle candidate `min_outer max_inner f`.
#[derive(Debug, Clone, PartialEq)]
pub struct Saddle {
    pub outer: Vec<f64>,
    pub inner: Vec<f64>,
    pub value: f64,
    pub evaluations: usize,
}

struct Inner<'a, F> {
    f: &'a F,
    bounds: &'a [Bound],
    opts: &'a MinimaxOptions,
    starts: Vec<Vec<f64>>,
    evaluations: usize,
}

impl<F: Fn(&[f64], &[f64]) -> f64> Inner<'_, F> {
    /// `max_inner f(outer, .)` in search coordinates, from the fixed starts
    /// and an optional warm start.
    fn maximize(&mut self, outer: &[f64], warm: Option<&[f64]>, all_starts: bool) -> (Vec<f64>, f64) {
        let (f, bounds) = (self.f, self.bounds);
        let mut best: (Vec<f64>, f64) = (Vec::new(), f64::INFINITY);
        let mut x = vec![0.0; bounds.len()];
        let mut neg = |u: &[f64]| -> f64 {
            for ((xi, ui), b) in x.iter_mut().zip(u).zip(bounds) {
                let (lo, hi) = b.u_range();
                if !(*ui >= lo && *ui <= hi) {
                    return f64::INFINITY;
                }
                *xi = b.from_u(*ui);
            }
            -f(outer, &x)
        };
        let steps: Vec<f64> = bounds.iter().map(|b| {
            let (lo, hi) = b.u_range();
            (hi - lo) / 8.0
        }).collect();
        let mut run = |start: &[f64], best: &mut (Vec<f64>, f64), evals: &mut usize| {
            let mut s = steps.clone();
            for (si, (ui, b)) in s.iter_mut().zip(start.iter().zip(bounds)) {
                if ui + *si > b.u_range().1 {
                    *si = -*si;
                }
            }
            let (u, v, e) = nelder_mead(&mut neg, start, &s, self.opts.inner_xtol, self.opts.inner_ftol, self.opts.inner_max_evals);
            *evals += e;
            if v < best.1 {
                *best = (u, v);
            }
        };
        let mut evals = 0;
        if let Some(wu) = warm {
            run(wu, &mut best, &mut evals);
        }
        if all_starts || warm.is_none() {
            for s in self.starts.clone() {
                run(&s, &mut best, &mut evals);
            }
        }
        self.evaluations += evals;
        if best.0.is_empty() {
            best.0 = self.starts[0].clone();
        }
        (best.0, -best.1)
    }
}

fn product_grid(ranges: &[(f64, f64)], points: usize) -> Vec<Vec<f64>> {
    let mut out = vec![Vec::new()];
    for &(lo, hi) in ranges {
        let mut next = Vec::with_capacity(out.len() * points);
        for p in &out {
            for i in 0..points {
                let t = if points == 1 { 0.5 } else { i as f64 / (points - 1) as f64 };
                let mut q = p.clone();
                q.push(lo + (hi - lo) * t);
                next.push(q);
            }
        }
        out = next;
    }
    out
}

/// `min_{outer} max_{inner} f(outer, inner)` over boxes.
///
/// The outer variables are scanned on a grid; each grid point gets a
/// multistart Nelder–Mead inner maximization. The winning cell is re-gridded
/// `refine_rounds` times with a window shrunk by `shrink`, and then the
/// outer value function is polished by Nelder–Mead. Fails when the value is
/// non-finite on the whole grid or when the solution sits on a box face.
pub fn scalar_minimax<F>(f: F, outer: &[Bound], inner: &[Bound], opts: &MinimaxOptions) -> Result<Saddle>
where
    F: Fn(&[f64], &[f64]) -> f64,
{
    for b in outer.iter().chain(inner) {
        b.validate()?;
    }
    if outer.is_empty() || inner.is_empty() || opts.outer_points < 2 {
        return Err(Error::invalid("min-max needs outer and inner variables and at least two grid points"));
    }
    let per_dim = ((opts.inner_starts.max(1) as f64).powf(1.0 / inner.len() as f64)).round().max(1.0) as usize;
    let starts = {
        let ranges: Vec<(f64, f64)> = inner
            .iter()
            .map(|b| {
                let (lo, hi) = b.u_range();
                let h = (hi - lo) / (2 * per_dim) as f64;
                (lo + h, hi - h)
            })
            .collect();
        product_grid(&ranges, per_dim)
    };
    let mut solver = Inner { f: &f, bounds: inner, opts, starts, evaluations: 0 };
    let to_x = |u: &[f64]| -> Vec<f64> { u.iter().zip(outer).map(|(ui, b)| b.from_u(*ui)).collect() };
    let inner_x = |u: &[f64]| -> Vec<f64> { u.iter().zip(inner).map(|(ui, b)| b.from_u(*ui)).collect() };

    let mut window: Vec<(f64, f64)> = outer.iter().map(|b| b.u_range()).collect();
    let mut best: Option<(Vec<f64>, Vec<f64>, f64)> = None;
    for round in 0..=opts.refine_rounds {
        let grid = product_grid(&window, opts.outer_points);
        let mut warm: Option<Vec<f64>> = best.as_ref().map(|b| b.1.clone());
        let mut round_best: Option<(Vec<f64>, Vec<f64>, f64)> = None;
        for u in &grid {
            let x = to_x(u);
            let (iu, v) = solver.maximize(&x, warm.as_deref(), true);
            if v.is_finite() {
                warm = Some(iu.clone());
                // ties keep the earlier grid point
                if round_best.as_ref().is_none_or(|b| v < b.2) {
                    round_best = Some((u.clone(), iu, v));
                }
            }
        }
        let Some(rb) = round_best else {
            if round == 0 {
                return Err(Error::numerical(
                    "min-max objective is non-finite at every outer grid point (scalars violate the domain of the program)",
                ));
            }
            break;
        };
        if best.as_ref().is_none_or(|b| rb.2 <= b.2) {
            best = Some(rb);
        }
        let centre = &best.as_ref().unwrap().0;
        window = window
            .iter()
            .zip(outer)
            .zip(centre)
            .map(|(((lo, hi), b), c)| {
                let (blo, bhi) = b.u_range();
                let half = (hi - lo) / (2.0 * opts.shrink);
                ((c - half).max(blo), (c + half).min(bhi))
            })
            .collect();
    }
    let (mut ou, mut iu, mut value) = best.unwrap();

    if opts.polish {
        let steps: Vec<f64> = window.iter().map(|(lo, hi)| (hi - lo) / 4.0).collect();
        let mut warm = iu.clone();
        let mut memo: Vec<(Vec<f64>, Vec<f64>, f64)> = Vec::new();
        let mut value_fn = |u: &[f64]| -> f64 {
            for (ui, b) in u.iter().zip(outer) {
                let (lo, hi) = b.u_range();
                if !(*ui >= lo && *ui <= hi) {
                    return f64::INFINITY;
                }
            }
            let (inu, v) = solver.maximize(&to_x(u), Some(&warm), false);
            if v.is_finite() {
                warm = inu.clone();
                memo.push((u.to_vec(), inu, v));
            }
            v
        };
        let (pu, pv, _) = nelder_mead(&mut value_fn, &ou, &steps, 1e-12, 1e-15, 3000);
        if pv <= value {
            // full multistart at the polished point guards against a stale warm start
            let (inu, v) = solver.maximize(&to_x(&pu), Some(&memo.last().map(|m| m.1.clone()).unwrap_or(iu.clone())), true);
            if v <= value {
                ou = pu;
                iu = inu;
                value = v;
            }
        }
    }

    for (label, us, bounds) in [("outer", &ou, outer), ("inner", &iu, inner)] {
        for (i, (u, b)) in us.iter().zip(bounds).enumerate() {
            let (lo, hi) = b.u_range();
            let tol = opts.face_tol * (hi - lo);
            if u - lo <= tol || hi - u <= tol {
                return Err(Error::numerical(format!(
                    "min-max solution lies on the {label} box face (variable {i} = {:e}, box [{:e}, {:e}])",
                    b.from_u(*u),
                    b.lo,
                    b.hi
                )));
            }
        }
    }
    Ok(Saddle { outer: to_x(&ou), inner: inner_x(&iu), value, evaluations: solver.evaluations })
}
