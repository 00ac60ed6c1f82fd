use std::fmt::Debug;

use num_traits::Float;
use serde::de::DeserializeOwned;
use serde::Serialize;

/// Floating point type the model and controller are evaluated in.
pub trait Scalar:
    Float + Debug + Default + Send + Sync + Serialize + DeserializeOwned + 'static
{
}

impl<T> Scalar for T where
    T: Float + Debug + Default + Send + Sync + Serialize + DeserializeOwned + 'static
{
}

/// Converts an `f64` literal into the working scalar type.
#[inline]
pub fn lit<T: Scalar>(v: f64) -> T {
    T::from(v).expect("literal representable in scalar type")
}

#[inline]
pub(crate) fn f<T: Scalar>(v: T) -> f64 {
    v.to_f64().unwrap_or(f64::NAN)
}
