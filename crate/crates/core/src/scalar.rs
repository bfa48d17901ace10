//! Scalar traits.
//!
//! Structure matrices and the Kronecker assembly only need ring arithmetic, so
//! they run over integers and rationals as well as floats. The numerical
//! layers work with `Complex<R>` for a real field `R`.

use std::fmt::Debug;
use std::ops::Neg;

use nalgebra::{ClosedAddAssign, ClosedMulAssign, ClosedSubAssign, Complex, RealField, Scalar};
use num_rational::Ratio;
use num_traits::{FromPrimitive, Num};

/// Commutative ring scalar with the arithmetic nalgebra needs for products.
pub trait Ring:
    Scalar + Copy + Debug + Num + Neg<Output = Self> + ClosedAddAssign + ClosedSubAssign + ClosedMulAssign
{
}

impl<T> Ring for T where
    T: Scalar + Copy + Debug + Num + Neg<Output = T> + ClosedAddAssign + ClosedSubAssign + ClosedMulAssign
{
}

/// Ring in which 2 is invertible, so the projectors `(I ± K)/2` exist.
pub trait Field: Ring {
    fn half() -> Self {
        Self::one() / (Self::one() + Self::one())
    }
}

impl Field for f32 {}
impl Field for f64 {}
impl Field for Complex<f32> {}
impl Field for Complex<f64> {}
impl Field for Ratio<i32> {}
impl Field for Ratio<i64> {}
impl Field for Ratio<i128> {}

/// Real floating-point type backing the complex numerical routines.
pub trait Real: RealField + Copy + FromPrimitive {
    /// Machine epsilon.
    fn eps() -> Self;
}

impl Real for f32 {
    fn eps() -> Self {
        f32::EPSILON
    }
}

impl Real for f64 {
    fn eps() -> Self {
        f64::EPSILON
    }
}

/// Converts an `f64` literal into `R`.
#[inline]
pub fn lit<R: Real>(x: f64) -> R {
    R::from_f64(x).expect("f64 literal representable")
}

/// `Complex<R>` from a real literal.
#[inline]
pub fn clit<R: Real>(x: f64) -> Complex<R> {
    Complex::new(lit(x), R::zero())
}
