//! Scalar abstraction: every numerical routine in this crate is generic over
//! [`Real`], instantiated with `f32` or `f64`.

use num_traits::{FromPrimitive, ToPrimitive};
use rand::distributions::uniform::SampleUniform;

/// Floating-point scalar: `f32` or `f64`.
pub trait Real:
    nalgebra::RealField + Copy + FromPrimitive + ToPrimitive + SampleUniform
{
}

impl Real for f32 {}
impl Real for f64 {}

/// Converts an `f64` constant into the working scalar type.
#[inline]
pub fn real<T: Real>(x: f64) -> T {
    T::from_f64(x).expect("f64 constant representable in scalar type")
}

/// Converts the working scalar back to `f64` (used by file formats and CSV).
#[inline]
pub fn to_f64<T: Real>(x: T) -> f64 {
    x.to_f64().expect("scalar representable as f64")
}
