//! Real scalar abstraction shared by the polynomial, grid and inner-function layers.

use nalgebra::{ComplexField, RealField};
use num_complex::Complex;
use rustfft::FftNum;

/// Real field usable for bidisk computations: `f32` or `f64`.
pub trait Scalar: RealField + FftNum + Copy {
    #[inline]
    fn lit(x: f64) -> Self {
        nalgebra::convert(x)
    }

    #[inline]
    fn to_f64(self) -> f64 {
        nalgebra::try_convert(self).unwrap_or(f64::NAN)
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}

/// `e^{iθ}`.
#[inline]
pub fn cis<T: Scalar>(theta: T) -> Complex<T> {
    Complex::new(theta.cos(), theta.sin())
}

#[inline]
pub fn modulus<T: Scalar>(z: Complex<T>) -> T {
    ComplexField::modulus(z)
}

/// The `k`-th of `n` equispaced points on the unit circle.
#[inline]
pub fn root_of_unity<T: Scalar>(k: usize, n: usize) -> Complex<T> {
    let two_pi = T::two_pi();
    cis(two_pi * T::lit(k as f64) / T::lit(n as f64))
}

#[inline]
pub fn czero<T: Scalar>() -> Complex<T> {
    Complex::new(T::zero(), T::zero())
}

#[inline]
pub fn cone<T: Scalar>() -> Complex<T> {
    Complex::new(T::one(), T::zero())
}
