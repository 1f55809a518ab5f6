//! Scalar abstraction shared by every numeric routine in the crate.

use std::fmt::Debug;

use nalgebra::RealField;
use num_traits::{FromPrimitive, ToPrimitive};

/// Real floating-point type the reduction and simulation code is generic over.
///
/// Implemented for `f32` and `f64`. The linear algebra is delegated to
/// `nalgebra`, hence the `RealField` bound; `num-traits` supplies the
/// lossless-enough conversions used for literals and reporting.
pub trait Scalar:
    RealField + Copy + FromPrimitive + ToPrimitive + Debug + Send + Sync + 'static
{
    /// Converts an `f64` literal into `Self`.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("literal representable in scalar type")
    }

    /// Converts `self` into an `f64` for reporting.
    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    /// `x`, raised to `factor` machine epsilons when the type cannot resolve it.
    #[inline]
    fn tol(x: f64, factor: f64) -> Self {
        Self::lit(x).max(Self::default_epsilon() * Self::lit(factor))
    }

    /// Default relative tolerance for the numerical rank-1 test.
    ///
    /// `1e-9` in double precision; single precision cannot resolve that and
    /// falls back to a multiple of its machine epsilon.
    fn default_rank_rtol() -> Self;
}

impl Scalar for f64 {
    #[inline]
    fn default_rank_rtol() -> Self {
        1e-9
    }
}

impl Scalar for f32 {
    #[inline]
    fn default_rank_rtol() -> Self {
        64.0 * f32::EPSILON
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn literals_round_trip() {
        assert_eq!(<f64 as Scalar>::lit(0.25), 0.25);
        assert_eq!(<f32 as Scalar>::lit(0.25), 0.25f32);
        assert_eq!(1.5f32.as_f64(), 1.5);
    }

    #[test]
    fn rank_tolerance_exceeds_epsilon() {
        assert_eq!(f64::default_rank_rtol(), 1e-9);
        assert!(f32::default_rank_rtol() > f32::EPSILON);
        assert_eq!(f64::tol(1e-9, 1024.0), 1e-9);
        assert_eq!(f32::tol(1e-9, 2.0), 2.0 * f32::EPSILON);
    }
}
