//! Scalar abstractions.
//!
//! Orbit and geometry code is written against [`Real`] (implemented for `f32`
//! and `f64`). The LP relaxation is written against [`LpScalar`], which is
//! implemented for `f64` and for exact big rationals so small instances can be
//! bounded without round-off.

use std::fmt::{Debug, Display};

use num_rational::BigRational;
use num_traits::{Float, FloatConst, FromPrimitive, Num, Signed, ToPrimitive, Zero};

/// Floating point type used by the orbital mechanics and geodesy code.
pub trait Real:
    Float + FloatConst + FromPrimitive + ToPrimitive + Debug + Display + Default + Send + Sync + 'static
{
    /// Converts an `f64` literal. Panics only for values the type cannot
    /// represent at all, which never happens for the constants used here.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("literal representable in target float type")
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    /// Convergence tolerance used by iterative solvers: `floor` for types
    /// precise enough to reach it, a small multiple of machine epsilon
    /// otherwise.
    #[inline]
    fn solver_tolerance(floor: f64) -> Self {
        let eps = Self::epsilon() * Self::lit(64.0);
        let floor = Self::lit(floor);
        if eps > floor {
            eps
        } else {
            floor
        }
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// Ordered field used by the simplex code.
pub trait LpScalar: Clone + PartialOrd + Num + Signed + FromPrimitive + Debug + Send + Sync + 'static {
    /// Zero-test tolerance. Exact types use zero.
    fn tolerance() -> Self;

    /// Whether arithmetic is exact (no refactorization or clipping needed).
    fn is_exact() -> bool;

    fn to_f64_lossy(&self) -> f64;

    fn from_count(v: u32) -> Self {
        <Self as FromPrimitive>::from_u32(v).expect("u32 fits every LP scalar")
    }
}

impl LpScalar for f64 {
    fn tolerance() -> Self {
        1e-9
    }

    fn is_exact() -> bool {
        false
    }

    fn to_f64_lossy(&self) -> f64 {
        *self
    }
}

impl LpScalar for BigRational {
    fn tolerance() -> Self {
        BigRational::zero()
    }

    fn is_exact() -> bool {
        true
    }

    fn to_f64_lossy(&self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

/// Reduces an angle to `[0, 2π)`.
pub fn wrap_two_pi<R: Real>(angle: R) -> R {
    let two_pi = R::TAU();
    let mut a = angle % two_pi;
    if a < R::zero() {
        a = a + two_pi;
    }
    // `a + 2π` can round up to exactly 2π for tiny negative inputs.
    if a >= two_pi {
        a = a - two_pi;
    }
    a
}

/// Reduces an angle in degrees to `[0, 360)`.
pub fn wrap_degrees<R: Real>(angle: R) -> R {
    let full = R::lit(360.0);
    let mut a = angle % full;
    if a < R::zero() {
        a = a + full;
    }
    if a >= full {
        a = a - full;
    }
    a
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wrap_handles_negative_and_large_angles() {
        let w: f64 = wrap_two_pi(-0.5);
        assert!((w - (std::f64::consts::TAU - 0.5)).abs() < 1e-15);
        let w: f64 = wrap_two_pi(7.0 * std::f64::consts::PI);
        assert!((w - std::f64::consts::PI).abs() < 1e-12);
        assert_eq!(wrap_degrees(-10.0f32), 350.0);
        assert_eq!(wrap_degrees(720.0f64), 0.0);
    }

    #[test]
    fn tolerance_floor_depends_on_precision() {
        assert_eq!(f64::solver_tolerance(1e-12), 1e-12);
        assert!(f32::solver_tolerance(1e-12) > 1e-6);
    }
}
