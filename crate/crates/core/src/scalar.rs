//! Scalar abstraction shared by the geometry, feature and calculus modules.

use std::fmt::{Debug, Display};

use num_traits::{Float, FromPrimitive, ToPrimitive};
use serde::de::DeserializeOwned;
use serde::Serialize;

/// Real floating-point type the feature map can be evaluated in.
///
/// Implemented for `f32` and `f64`. Everything downstream of evaluation
/// (rank decisions, certifier tolerances) is expressed in `f64`.
pub trait Scalar:
    Float
    + FromPrimitive
    + ToPrimitive
    + Debug
    + Display
    + Default
    + Send
    + Sync
    + Serialize
    + DeserializeOwned
    + nalgebra::Scalar
    + 'static
{
    /// Lossy conversion from `f64`; exact for `f64` itself.
    fn from_f64_lossy(v: f64) -> Self {
        <Self as FromPrimitive>::from_f64(v).expect("f64 converts to every supported scalar")
    }

    fn to_f64_lossy(self) -> f64 {
        ToPrimitive::to_f64(&self).expect("supported scalars convert to f64")
    }

    fn from_usize_lossy(v: usize) -> Self {
        <Self as FromPrimitive>::from_usize(v).expect("usize converts to every supported scalar")
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}

/// Largest absolute value of a slice, `0` for an empty slice.
pub(crate) fn max_abs<T: Scalar>(values: &[T]) -> T {
    values
        .iter()
        .fold(T::zero(), |acc, v| if v.abs() > acc { v.abs() } else { acc })
}
