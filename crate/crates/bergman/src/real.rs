//! Scalar abstraction for the analysis layer.
//!
//! Everything numeric is generic over [`Real`]; `f32` and `f64` both
//! implement it. Grid coordinates do not go through this trait: they use the
//! exact integer representations in [`crate::geometry::dyadic`].

use num_traits::{Float, FromPrimitive, NumAssign};
use std::fmt::{Debug, Display};

/// Floating scalar used by quadrature and the analytic estimates. The
/// `NumAssign` half is what lets `num_complex::Complex<Self>` use its
/// compound-assignment operators.
pub trait Real:
    Float + FromPrimitive + NumAssign + Debug + Display + Send + Sync + 'static
{
    /// Lossy conversion from an `f64` constant. Exact for every constant the
    /// crate uses when `Self = f64`.
    fn of(x: f64) -> Self {
        Self::from_f64(x).expect("finite f64 constant must convert")
    }

    /// π in `Self` precision.
    fn pi() -> Self {
        Self::of(std::f64::consts::PI)
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// Shorthand for `T::of` usable in generic code without turbofish noise.
pub fn of<T: Real>(x: f64) -> T {
    T::of(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn conversion_is_exact_for_f64() {
        assert_eq!(f64::of(0.1), 0.1);
        assert_eq!(f64::of(-3.5e300), -3.5e300);
    }

    #[test]
    fn f32_roundtrips_representable_constants() {
        assert_eq!(f32::of(0.5), 0.5f32);
        assert_eq!(f32::pi(), std::f32::consts::PI);
    }
}
