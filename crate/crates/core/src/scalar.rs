//! Scalar abstraction shared by every numeric routine in the crate.

use std::fmt::{Debug, Display};

use num_traits::{Float, FromPrimitive, ToPrimitive};

/// Floating point type the models are computed in.
///
/// Implemented for `f32` and `f64`. Physical constants are written as `f64`
/// literals and brought into the scalar type with [`Scalar::lit`].
pub trait Scalar:
    Float + FromPrimitive + ToPrimitive + Debug + Display + Default + Send + Sync + 'static
{
    /// Converts an `f64` constant into this scalar type.
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("finite f64 literal representable in scalar type")
    }

    /// Relative tolerance used when checking that one interval is an integer
    /// multiple of another.
    fn grid_tolerance() -> Self {
        Self::epsilon().sqrt()
    }

    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}
