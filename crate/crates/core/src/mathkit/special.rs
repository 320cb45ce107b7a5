use libm::erfc;

use crate::{Error, Result, Real};

/// Gaussian tail `Q(x) = P(G > x)` for standard normal `G`.
///
/// Evaluated as `erfc(x / sqrt 2) / 2`, which keeps full relative accuracy in
/// the far right tail. NaN propagates.
pub fn q_function<T: Real>(x: T) -> T {
    if x.is_nan() {
        return x;
    }
    if x.is_infinite() {
        return if x > T::zero() { T::zero() } else { T::one() };
    }
    let v = x.as_f64();
    T::lit(0.5 * erfc(v * std::f64::consts::FRAC_1_SQRT_2))
}

/// Standard normal density.
pub fn normal_pdf<T: Real>(x: T) -> T {
    let half = T::lit(0.5);
    (-(half * x * x)).exp() / (T::TAU()).sqrt()
}

/// `E[(|X| - 1)^2 1{|X| > 1}]` for `X ~ N(0, s^2)`, in closed form
/// `2(s^2 + 1) Q(1/s) - 2 s phi(1/s)`.
pub fn truncated_moment<T: Real>(s: T) -> Result<T> {
    if !(s > T::zero()) {
        return Err(Error::invalid(format!("truncated_moment needs s > 0, got {s}")));
    }
    let two = T::lit(2.0);
    let k = s.recip();
    Ok(two * (s * s + T::one()) * q_function(k) - two * s * normal_pdf(k))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn q_at_landmarks() {
        assert_eq!(q_function(0.0_f64), 0.5);
        assert_eq!(q_function(f64::NEG_INFINITY), 1.0);
        assert_eq!(q_function(f64::INFINITY), 0.0);
        assert!(q_function(f64::NAN).is_nan());
        assert!((q_function(1.0_f64) - 0.158655).abs() < 5e-7);
    }

    #[test]
    fn q_matches_integration_oracle() {
        // composite Gauss-Legendre on [x, 12]; the tail past 12 is below 1e-32
        let gl = gauss_quad::legendre::GaussLegendre::new(20.try_into().unwrap());
        let tail = |x: f64| {
            let (mut total, width) = (0.0, 0.25);
            let mut a = x;
            while a < 12.0 {
                let b = (a + width).min(12.0);
                total += gl.integrate(a, b, normal_pdf::<f64>);
                a = b;
            }
            total
        };
        for i in 0..=160 {
            let x = -8.0 + 0.1 * i as f64;
            assert!((q_function(x) - tail(x)).abs() <= 1e-12, "x = {x}: {}", q_function(x) - tail(x));
        }
    }

    #[test]
    fn q_symmetry_and_monotonicity() {
        let mut prev = 1.0;
        for i in -400..=400 {
            let x = i as f64 * 0.025;
            let q = q_function(x);
            assert!((q + q_function(-x) - 1.0).abs() < 1e-14, "x = {x}");
            assert!(q <= prev);
            prev = q;
        }
    }

    #[test]
    fn q_far_tail_keeps_relative_accuracy() {
        // Mills-ratio asymptotics: Q(x) ~ phi(x)/x (1 - 1/x^2 + 3/x^4)
        let x = 30.0_f64;
        let approx = normal_pdf(x) / x * (1.0 - 1.0 / (x * x) + 3.0 / x.powi(4));
        assert!(((q_function(x) - approx) / approx).abs() < 1e-6);
    }

    #[test]
    fn q_in_single_precision() {
        assert!((q_function(1.0_f32) - 0.158_655_25).abs() < 1e-6);
    }

    #[test]
    fn truncated_moment_limits_and_errors() {
        assert!(truncated_moment(1e-3_f64).unwrap().abs() < 1e-300);
        assert!(truncated_moment(0.0_f64).is_err());
        assert!(truncated_moment(-1.0_f64).is_err());
        // large s: (|X|-1)^2 1{|X|>1} ~ X^2 - 2|X| + 1
        let s = 1e3_f64;
        let m = truncated_moment(s).unwrap();
        let lead = s * s - 2.0 * s * (2.0 / std::f64::consts::PI).sqrt() + 1.0;
        assert!(((m - lead) / lead).abs() < 1e-5);
    }
}
