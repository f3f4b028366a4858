//! Floating-point scalar abstraction shared by every numeric kernel.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FromPrimitive, ToPrimitive};
use serde::de::DeserializeOwned;
use serde::Serialize;

/// Real scalar used for profiles, scores and clustering.
///
/// Implemented for `f32` and `f64`. The pipeline itself runs on `f64`; the
/// kernels are kept generic so they can be reused at single precision.
pub trait Scalar:
    Float
    + FromPrimitive
    + ToPrimitive
    + Sum
    + Debug
    + Display
    + Default
    + Serialize
    + DeserializeOwned
    + Send
    + Sync
    + 'static
{
    /// Converts an `f64` literal into the scalar type.
    #[inline]
    fn lit(value: f64) -> Self {
        Self::from_f64(value).expect("finite literal fits the scalar type")
    }

    /// Converts a count into the scalar type.
    #[inline]
    fn of_usize(value: usize) -> Self {
        Self::from_usize(value).expect("count fits the scalar type")
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}

/// Arithmetic mean; `None` for an empty slice. Exact for constant input.
pub(crate) fn mean<T: Scalar>(values: &[T]) -> Option<T> {
    let first = *values.first()?;
    if values.iter().all(|&v| v == first) {
        return Some(first);
    }
    let sum: T = values.iter().copied().sum();
    Some(sum / T::of_usize(values.len()))
}

/// Sample (n-1) standard deviation; zero for fewer than two values.
pub(crate) fn sample_std<T: Scalar>(values: &[T]) -> T {
    if values.len() < 2 {
        return T::zero();
    }
    let m = mean(values).unwrap_or_else(T::zero);
    let ss: T = values.iter().map(|&v| (v - m) * (v - m)).sum();
    (ss / T::of_usize(values.len() - 1)).sqrt()
}

/// Total order for finite floats, used for deterministic sorting.
#[inline]
pub(crate) fn cmp_scalar<T: Scalar>(a: &T, b: &T) -> std::cmp::Ordering {
    a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal)
}
