use ndarray::{Array1, ArrayView1};

use crate::{Error, Real, Result};

/// Threshold `theta` such that `sign(v) max(|v| - theta, 0)` is the Euclidean
/// projection of `v` onto the ℓ1 ball of the given radius, or `None` when `v`
/// is already inside the ball.
pub fn l1_ball_threshold<T: Real>(v: ArrayView1<'_, T>, radius: T) -> Result<Option<T>> {
    if !(radius >= T::zero()) {
        return Err(Error::invalid(format!("ℓ1-ball radius must be nonnegative, got {radius}")));
    }
    let norm1 = v.iter().fold(T::zero(), |acc, x| acc + x.abs());
    if norm1 <= radius {
        return Ok(None);
    }
    let mut mags: Vec<T> = v.iter().map(|x| x.abs()).collect();
    mags.sort_unstable_by(|a, b| b.partial_cmp(a).unwrap_or(std::cmp::Ordering::Equal));
    let mut cum = T::zero();
    let mut theta = T::zero();
    for (j, &m) in mags.iter().enumerate() {
        cum = cum + m;
        let cand = (cum - radius) / T::from_usize(j + 1).unwrap();
        if m > cand {
            theta = cand;
        } else {
            break;
        }
    }
    Ok(Some(theta.max(T::zero())))
}

/// Euclidean projection onto `{u : ||u||_1 <= radius}`. Returns `v` unchanged
/// when it is already feasible.
pub fn project_l1_ball<T: Real>(v: ArrayView1<'_, T>, radius: T) -> Result<Array1<T>> {
    Ok(match l1_ball_threshold(v, radius)? {
        None => v.to_owned(),
        Some(theta) => v.mapv(|x| {
            let a = x.abs() - theta;
            if a > T::zero() { a.copysign(x) } else { T::zero() }
        }),
    })
}

/// Proximal map of `t ||.||_inf`, by the Moreau decomposition
/// `v - P_{t B_1}(v)`.
pub fn prox_linf<T: Real>(v: ArrayView1<'_, T>, t: T) -> Result<Array1<T>> {
    if !(t > T::zero()) {
        return Err(Error::invalid(format!("prox parameter t must be positive, got {t}")));
    }
    let p = project_l1_ball(v, t)?;
    Ok(&v - &p)
}
