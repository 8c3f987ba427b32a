//! Scalar abstraction shared by every numerical routine in the crate.
//!
//! All of the physics is written against [`Real`], so the same code runs in
//! `f64` (the default, and the only precision the tolerances in the test
//! suite are pinned for) and in `f32` for quick, memory-light sweeps.

use nalgebra::ComplexField;
use nalgebra::{DMatrix, RealField};
use num_complex::Complex;
use num_traits::{FromPrimitive, ToPrimitive};
use rustfft::FftNum;

/// Real floating-point scalar usable by the engine.
pub trait Real: RealField + Copy + FromPrimitive + ToPrimitive + FftNum + serde::Serialize {}

impl Real for f32 {}
impl Real for f64 {}

/// Complex number over a [`Real`].
pub type Cplx<T> = Complex<T>;

/// Dense complex matrix over a [`Real`].
pub type CMatrix<T> = DMatrix<Complex<T>>;

/// Converts an `f64` literal into `T`.
#[inline]
pub fn lit<T: Real>(x: f64) -> T {
    T::from_f64(x).expect("literal representable in scalar type")
}

#[inline]
pub fn to_f64<T: Real>(x: T) -> f64 {
    x.to_f64().expect("finite scalar converts to f64")
}

#[inline]
pub fn re<T: Real>(x: T) -> Complex<T> {
    Complex::new(x, T::zero())
}

#[inline]
pub fn im<T: Real>(x: T) -> Complex<T> {
    Complex::new(T::zero(), x)
}

#[inline]
pub fn two_pi<T: Real>() -> T {
    T::two_pi()
}

/// Largest entry modulus of a complex matrix.
pub fn max_abs<T: Real>(m: &CMatrix<T>) -> T {
    m.iter().fold(T::zero(), |acc, z| acc.max(z.modulus()))
}

/// r·e^{iθ}.
#[inline]
pub fn polar<T: Real>(r: T, theta: T) -> Complex<T> {
    Complex::new(r * theta.cos(), r * theta.sin())
}
