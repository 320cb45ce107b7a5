use ndarray::NdFloat;
use num_traits::{FloatConst, FromPrimitive};

/// Floating-point scalar accepted by the generic kernels (`f32` or `f64`).
pub trait Real: NdFloat + FloatConst + FromPrimitive + Default {
    /// Lossy conversion from an `f64` literal.
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable in scalar type")
    }

    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Real for f32 {}
impl Real for f64 {}
