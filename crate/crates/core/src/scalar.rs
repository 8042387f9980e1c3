use std::fmt::{Debug, Display};

use nalgebra::RealField;
use num_traits::{FromPrimitive, ToPrimitive};

/// Real scalar type the numerical routines are generic over.
///
/// The linear algebra comes from nalgebra's [`RealField`]; conversions to and
/// from `f64` come from num-traits. `f32` and `f64` are provided.
pub trait Real:
    RealField + Copy + FromPrimitive + ToPrimitive + Display + Debug + Send + Sync + 'static
{
    /// Frobenius tolerance on `UᵀU − I` for a basis to count as orthonormal.
    const ORTHO_TOL: f64;

    /// Converts an `f64` literal. Infallible for the provided float types.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable in scalar type")
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().expect("scalar convertible to f64")
    }
}

impl Real for f64 {
    const ORTHO_TOL: f64 = 1e-10;
}

impl Real for f32 {
    const ORTHO_TOL: f64 = 1e-4;
}
