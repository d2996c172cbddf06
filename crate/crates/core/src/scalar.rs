use std::fmt::{Debug, Display, LowerExp};

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};
use serde::de::DeserializeOwned;
use serde::Serialize;

/// Floating point scalar the whole crate is generic over: `f32` or `f64`.
pub trait Scalar:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + Debug
    + Display
    + LowerExp
    + Default
    + Send
    + Sync
    + Serialize
    + DeserializeOwned
    + 'static
{
    /// Converts an `f64` literal.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("literal representable in scalar type")
    }

    #[inline]
    fn of_i64(n: i64) -> Self {
        Self::from_i64(n).expect("integer representable in scalar type")
    }

    #[inline]
    fn of_usize(n: usize) -> Self {
        Self::from_usize(n).expect("integer representable in scalar type")
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}

/// `x` clamped to `[lo, hi]`.
#[inline]
pub(crate) fn clamp<T: Scalar>(x: T, lo: T, hi: T) -> T {
    if x < lo {
        lo
    } else if x > hi {
        hi
    } else {
        x
    }
}

/// Rounds `ratio` to the nearest integer when it is within a relative
/// `1e-9` of it, otherwise returns `None`.
pub(crate) fn near_integer<T: Scalar>(ratio: T) -> Option<i64> {
    let r = ratio.round();
    let tol = T::lit(1e-9) * T::one().max(ratio.abs());
    if (ratio - r).abs() <= tol {
        r.to_i64()
    } else {
        None
    }
}

/// Number of uniform steps of length `dt` needed to reach `horizon`.
pub(crate) fn steps_to<T: Scalar>(horizon: T, dt: T) -> usize {
    if horizon <= T::zero() {
        return 0;
    }
    let ratio = horizon / dt;
    match near_integer(ratio) {
        Some(n) => n.max(0) as usize,
        None => ratio.ceil().to_usize().unwrap_or(0),
    }
}

/// Largest power of two not exceeding `x` (x > 0).
pub fn dyadic_floor<T: Scalar>(x: T) -> T {
    let two = T::lit(2.0);
    let e = x.log2().floor();
    let mut p = two.powf(e);
    while p > x {
        p = p / two;
    }
    while p * two <= x {
        p = p * two;
    }
    p
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dyadic_floor_is_power_of_two() {
        assert_eq!(dyadic_floor(0.3_f64), 0.25);
        assert_eq!(dyadic_floor(1.0_f64), 1.0);
        assert_eq!(dyadic_floor(5.0e-4_f64), 2.0_f64.powi(-11));
        assert_eq!(dyadic_floor(0.75_f32), 0.5);
    }

    #[test]
    fn steps_snap_to_integer_ratios() {
        let tau = std::f64::consts::PI / 12.0;
        assert_eq!(steps_to(10.0 * tau, 1e-3 * tau), 10_000);
        assert_eq!(steps_to(1.05, 0.1), 11);
        assert_eq!(steps_to(0.0, 0.1), 0);
    }
}
