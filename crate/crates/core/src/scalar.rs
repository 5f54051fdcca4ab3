//! The scalar abstraction every geometric routine is generic over.

use nalgebra::RealField;
use num_traits::{FromPrimitive, ToPrimitive};

/// A real floating-point scalar (`f32` or `f64` in practice).
///
/// Tolerances throughout the crate are stated for `f64`; [`Real::tol`]
/// widens them for lower-precision types.
pub trait Real: RealField + Copy + FromPrimitive + ToPrimitive {
    /// Converts an `f64` literal.
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("finite f64 literal")
    }

    fn from_int(i: i64) -> Self {
        Self::lit(i as f64)
    }

    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    /// An `f64` tolerance rescaled to this type's precision.
    fn tol(tol_f64: f64) -> Self {
        let eps = Self::default_epsilon().as_f64();
        let ratio = eps / f64::EPSILON;
        Self::lit((tol_f64 * ratio.sqrt()).max(64.0 * eps))
    }
}

impl<T> Real for T where T: RealField + Copy + FromPrimitive + ToPrimitive {}
