//! Generic scalar abstraction over the floating-point types the toolkit runs on.

use std::fmt::{Debug, Display, LowerExp};
use std::iter::Sum;

/// Floating-point scalar the whole toolkit is generic over (`f32` or `f64`).
pub trait Real:
    num_traits::Float
    + num_traits::FromPrimitive
    + num_traits::NumAssign
    + Debug
    + Display
    + LowerExp
    + Default
    + Sum
    + Send
    + Sync
    + 'static
{
    /// Lossy conversion from an `f64` constant.
    fn from_f64_lossy(v: f64) -> Self {
        <Self as num_traits::FromPrimitive>::from_f64(v).expect("finite f64 converts")
    }

    /// Conversion from a count.
    fn from_usize_lossy(v: usize) -> Self {
        <Self as num_traits::FromPrimitive>::from_usize(v).expect("usize converts")
    }

    fn to_f64_lossy(self) -> f64;
}

impl Real for f32 {
    fn to_f64_lossy(self) -> f64 {
        self as f64
    }
}

impl Real for f64 {
    fn to_f64_lossy(self) -> f64 {
        self
    }
}

/// Shorthand for lifting an `f64` constant into a generic scalar.
#[inline]
pub fn c<T: Real>(v: f64) -> T {
    T::from_f64_lossy(v)
}
