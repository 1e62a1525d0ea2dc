//! Scalar abstraction for the filter math.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive, NumAssign, ToPrimitive};

/// Floating-point scalar the filter math is generic over.
///
/// Implemented for `f32` and `f64`. Everything the tracker computes
/// (dynamics, likelihoods, weights, metrics) is expressed against this
/// trait; pick the instantiation at the crate boundary.
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + NumAssign
    + Sum
    + Default
    + Display
    + Debug
    + Send
    + Sync
    + 'static
{
}

impl Real for f32 {}
impl Real for f64 {}

/// Converts an `f64` constant into the working scalar type.
#[inline]
pub fn real<T: Real>(x: f64) -> T {
    T::from_f64(x).expect("f64 constant representable in scalar type")
}

/// Wraps an angle to the canonical interval `(-pi, pi]`.
pub fn wrap_angle<T: Real>(x: T) -> T {
    let two_pi = T::PI() + T::PI();
    let mut r = x % two_pi;
    if r > T::PI() {
        r -= two_pi;
    } else if r <= -T::PI() {
        r += two_pi;
    }
    r
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn wrap_angle_canonical_interval() {
        let pi = std::f64::consts::PI;
        assert_relative_eq!(wrap_angle(pi), pi);
        assert_relative_eq!(wrap_angle(-pi), pi);
        assert_relative_eq!(wrap_angle(3.0 * pi), pi);
        assert_relative_eq!(wrap_angle(2.0 * pi), 0.0);
        assert_relative_eq!(wrap_angle(pi + 0.1), -pi + 0.1, epsilon = 1e-12);
        assert_relative_eq!(wrap_angle(-pi - 0.1), pi - 0.1, epsilon = 1e-12);
        assert_relative_eq!(wrap_angle(0.5), 0.5);
    }

    #[test]
    fn wrap_angle_f32() {
        let pi = std::f32::consts::PI;
        let w = wrap_angle(3.0f32 * pi);
        assert!((w - pi).abs() < 1e-5 || (w + pi).abs() < 1e-5);
    }
}
