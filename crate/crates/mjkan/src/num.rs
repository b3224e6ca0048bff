//! Scalar abstraction: all numeric code is generic over `Scalar` (f32 or f64).

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FromPrimitive, NumAssignOps, ToPrimitive};

/// Floating-point scalar usable throughout the crate.
///
/// The experiment harness and CLI fix this to `f64` (see the type aliases at
/// the crate root); the math itself works for any implementor.
pub trait Scalar:
    Float + FromPrimitive + ToPrimitive + NumAssignOps + Sum + Default + Debug + Display + Send + Sync + 'static
{
    /// Convert an `f64` constant into this scalar type.
    #[inline]
    fn c(v: f64) -> Self {
        Self::from_f64(v).expect("constant representable in Scalar type")
    }

    /// Lossy view as `f64`, for reporting and hashing.
    #[inline]
    fn to_f64_lossy(self) -> f64 {
        self.to_f64().expect("Scalar convertible to f64")
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}
