use std::fmt;
use std::sync::Arc;

use crate::{Error, Result, Real};

/// A convex scalar penalty together with its proximal map.
///
/// `prox(w, t)` must return `argmin_x (w - x)^2 / (2t) + value(x)`.
pub trait ScalarPenalty<T>: Send + Sync {
    fn value(&self, x: T) -> T;
    fn prox(&self, w: T, t: T) -> T;

    /// Points where `e_f(.; t)` is not smooth, if known.
    fn envelope_kinks(&self, _t: T) -> Vec<T> {
        Vec::new()
    }
}

/// Which scalar penalty an envelope is taken of.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EnvelopeKind {
    Absolute,
    Quadratic,
    Custom,
}

/// Moreau envelope `e_f(w; t) = min_x (w - x)^2 / (2t) + f(x)` of a scalar
/// penalty `f`.
#[derive(Clone)]
pub enum EnvelopeSpec<T = f64> {
    /// `f = |.|`; the envelope is the Huber function.
    Absolute,
    /// `f = (.)^2`.
    Quadratic,
    Custom(Arc<dyn ScalarPenalty<T>>),
}

impl<T> fmt::Debug for EnvelopeSpec<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EnvelopeSpec::Absolute => f.write_str("Absolute"),
            EnvelopeSpec::Quadratic => f.write_str("Quadratic"),
            EnvelopeSpec::Custom(_) => f.write_str("Custom(..)"),
        }
    }
}

impl<T: Real> EnvelopeSpec<T> {
    pub fn kind(&self) -> EnvelopeKind {
        match self {
            EnvelopeSpec::Absolute => EnvelopeKind::Absolute,
            EnvelopeSpec::Quadratic => EnvelopeKind::Quadratic,
            EnvelopeSpec::Custom(_) => EnvelopeKind::Custom,
        }
    }

    pub fn penalty(&self, x: T) -> T {
        match self {
            EnvelopeSpec::Absolute => x.abs(),
            EnvelopeSpec::Quadratic => x * x,
            EnvelopeSpec::Custom(p) => p.value(x),
        }
    }

    pub fn prox(&self, w: T, t: T) -> Result<T> {
        check_t(t)?;
        Ok(self.prox_unchecked(w, t))
    }

    pub fn envelope(&self, w: T, t: T) -> Result<T> {
        check_t(t)?;
        Ok(self.envelope_unchecked(w, t))
    }

    /// Points where the envelope has a discontinuous second derivative.
    pub fn kinks(&self, t: T) -> Vec<T> {
        match self {
            EnvelopeSpec::Absolute => vec![-t, t],
            EnvelopeSpec::Quadratic => Vec::new(),
            EnvelopeSpec::Custom(p) => p.envelope_kinks(t),
        }
    }

    pub(crate) fn prox_unchecked(&self, w: T, t: T) -> T {
        match self {
            EnvelopeSpec::Absolute => soft_threshold(w, t),
            EnvelopeSpec::Quadratic => w / (T::one() + t + t),
            EnvelopeSpec::Custom(p) => p.prox(w, t),
        }
    }

    pub(crate) fn envelope_unchecked(&self, w: T, t: T) -> T {
        match self {
            EnvelopeSpec::Absolute => huber(w, t),
            EnvelopeSpec::Quadratic => w * w / (T::one() + t + t),
            EnvelopeSpec::Custom(p) => {
                let x = p.prox(w, t);
                let r = w - x;
                r * r / (t + t) + p.value(x)
            }
        }
    }
}

fn check_t<T: Real>(t: T) -> Result<()> {
    if t > T::zero() {
        Ok(())
    } else {
        Err(Error::invalid(format!("envelope parameter t must be positive, got {t}")))
    }
}

/// `sign(w) max(|w| - t, 0)`.
#[inline]
pub fn soft_threshold<T: Real>(w: T, t: T) -> T {
    let a = w.abs() - t;
    if a > T::zero() {
        a.copysign(w)
    } else if w.is_nan() {
        w
    } else {
        T::zero()
    }
}

/// Huber function: `w^2 / (2t)` for `|w| <= t`, else `|w| - t/2`.
#[inline]
pub fn huber<T: Real>(w: T, t: T) -> T {
    let a = w.abs();
    if a <= t {
        w * w / (t + t)
    } else {
        a - t * T::lit(0.5)
    }
}

pub fn envelope_abs<T: Real>(w: T, t: T) -> Result<T> {
    EnvelopeSpec::<T>::Absolute.envelope(w, t)
}

pub fn prox_abs<T: Real>(w: T, t: T) -> Result<T> {
    EnvelopeSpec::<T>::Absolute.prox(w, t)
}

pub fn envelope_quad<T: Real>(w: T, t: T) -> Result<T> {
    EnvelopeSpec::<T>::Quadratic.envelope(w, t)
}

pub fn prox_quad<T: Real>(w: T, t: T) -> Result<T> {
    EnvelopeSpec::<T>::Quadratic.prox(w, t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Brute-force envelope: dense 1-D grid around the candidate minimizer.
    fn brute(w: f64, t: f64, f: impl Fn(f64) -> f64) -> (f64, f64) {
        let (lo, hi) = (-w.abs() - 2.0, w.abs() + 2.0);
        let steps = 400_000;
        let mut best = (f64::INFINITY, 0.0);
        for i in 0..=steps {
            let x = lo + (hi - lo) * i as f64 / steps as f64;
            let v = (w - x).powi(2) / (2.0 * t) + f(x);
            if v < best.0 {
                best = (v, x);
            }
        }
        best
    }

    #[test]
    fn abs_examples() {
        assert_eq!(envelope_abs(0.0, 0.7).unwrap(), 0.0);
        assert_eq!(prox_abs(0.0, 0.7).unwrap(), 0.0);
        let (e, x) = brute(3.0, 1.0, f64::abs);
        assert!((e - 2.5).abs() < 1e-8 && (x - 2.0).abs() < 1e-4);
        assert!((envelope_abs(3.0f64, 1.0).unwrap() - 2.5).abs() < 1e-15);
        assert_eq!(prox_abs(3.0, 1.0).unwrap(), 2.0);
        let (e, x) = brute(0.5, 1.0, f64::abs);
        assert!((e - 0.125).abs() < 1e-8 && x.abs() < 1e-4);
        assert_eq!(envelope_abs(0.5, 1.0).unwrap(), 0.125);
        assert_eq!(prox_abs(0.5, 1.0).unwrap(), 0.0);
    }

    #[test]
    fn quad_examples() {
        assert_eq!(envelope_quad(0.0, 2.0).unwrap(), 0.0);
        assert_eq!(prox_quad(0.0, 2.0).unwrap(), 0.0);
        let (e, x) = brute(1.0, 0.5, |x| x * x);
        assert!((e - 0.5).abs() < 1e-8 && (x - 0.5).abs() < 1e-4);
        assert_eq!(envelope_quad(1.0, 0.5).unwrap(), 0.5);
        assert_eq!(prox_quad(1.0, 0.5).unwrap(), 0.5);
    }

    #[test]
    fn nonpositive_t_rejected() {
        assert!(envelope_abs(1.0, 0.0).is_err());
        assert!(prox_abs(1.0, -1.0).is_err());
        assert!(envelope_quad(1.0, 0.0).is_err());
        assert!(prox_quad(1.0, f64::NAN).is_err());
    }

    #[test]
    fn nan_propagates() {
        assert!(envelope_abs(f64::NAN, 1.0).unwrap().is_nan());
        assert!(prox_abs(f64::NAN, 1.0).unwrap().is_nan());
    }

    struct Cubic; // f(x) = |x|^3 / 3, prox solves r + t x|x| = w
    impl ScalarPenalty<f64> for Cubic {
        fn value(&self, x: f64) -> f64 {
            x.abs().powi(3) / 3.0
        }
        fn prox(&self, w: f64, t: f64) -> f64 {
            let a = w.abs();
            ((-1.0 + (1.0 + 4.0 * t * a).sqrt()) / (2.0 * t)).copysign(w)
        }
    }

    #[test]
    fn custom_penalty_matches_brute_force() {
        let spec = EnvelopeSpec::Custom(Arc::new(Cubic));
        for &(w, t) in &[(1.3, 0.4), (-2.0, 1.5), (0.2, 3.0)] {
            let (e, x) = brute(w, t, |x| Cubic.value(x));
            assert!((spec.envelope(w, t).unwrap() - e).abs() < 1e-8);
            assert!((spec.prox(w, t).unwrap() - x).abs() < 1e-4);
        }
        assert_eq!(spec.kind(), EnvelopeKind::Custom);
    }

    proptest! {
        #[test]
        fn envelope_prox_identity(w in -50.0..50.0_f64, t in 1e-3..20.0_f64) {
            let p = prox_abs(w, t).unwrap();
            let e = envelope_abs(w, t).unwrap();
            prop_assert!((e - ((w - p).powi(2) / (2.0 * t) + p.abs())).abs() <= 1e-12 * (1.0 + e));
            let q = prox_quad(w, t).unwrap();
            let eq = envelope_quad(w, t).unwrap();
            prop_assert!((eq - ((w - q).powi(2) / (2.0 * t) + q * q)).abs() <= 1e-12 * (1.0 + eq));
            prop_assert!((eq * (1.0 + 2.0 * t) - w * w).abs() <= 1e-12 * (1.0 + w * w));
        }

        #[test]
        fn envelope_bounds_and_monotone_in_t(w in -50.0..50.0_f64, t in 1e-3..20.0_f64, dt in 0.0..5.0_f64) {
            for spec in [EnvelopeSpec::<f64>::Absolute, EnvelopeSpec::Quadratic] {
                let e = spec.envelope(w, t).unwrap();
                prop_assert!(e >= 0.0);
                prop_assert!(e <= spec.penalty(w) * (1.0 + 1e-15) + 1e-300);
                prop_assert!(spec.envelope(w, t + dt).unwrap() <= e * (1.0 + 1e-15) + 1e-300);
            }
        }

        #[test]
        fn soft_threshold_nonexpansive(a in -50.0..50.0_f64, b in -50.0..50.0_f64, t in 0.0..20.0_f64) {
            // slack for the roundings in |a| - t and |b| - t
            let slack = 4.0 * f64::EPSILON * (a.abs() + b.abs());
            prop_assert!((soft_threshold(a, t) - soft_threshold(b, t)).abs() <= (a - b).abs() + slack);
        }
    }
}
