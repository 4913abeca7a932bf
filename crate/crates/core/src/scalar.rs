//! Scalar abstraction shared by images, features and the kd-tree.

use std::fmt::{Debug, Display};
use std::str::FromStr;

use num_traits::{Float, FromPrimitive, ToPrimitive};

/// Real number type the pipeline is generic over.
///
/// Implemented for `f32` and `f64`. `Display` must print the shortest
/// representation that parses back to the same value, which the model
/// file format relies on.
pub trait Scalar:
    Float + FromPrimitive + ToPrimitive + Display + Debug + FromStr + Default + Send + Sync + 'static
{
    /// Converts a count or ratio, panicking only if `T` cannot represent it at all.
    fn from_f64_lossy(v: f64) -> Self {
        Self::from_f64(v).expect("scalar conversion from f64")
    }

    fn from_usize_lossy(v: usize) -> Self {
        Self::from_usize(v).expect("scalar conversion from usize")
    }

    fn half() -> Self {
        Self::from_f64_lossy(0.5)
    }
}

impl<T> Scalar for T where
    T: Float
        + FromPrimitive
        + ToPrimitive
        + Display
        + Debug
        + FromStr
        + Default
        + Send
        + Sync
        + 'static
{
}
