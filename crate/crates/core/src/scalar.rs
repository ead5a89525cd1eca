//! Scalar abstraction shared by every module.

use std::fmt;

use nalgebra::RealField;
use num_complex::Complex;
use num_traits::{FloatConst, ToPrimitive};

/// Real floating-point scalar the simulator is generic over (`f32` or `f64`).
///
/// Numerical thresholds live here because they depend on the precision of the
/// scalar, not on the physics.
pub trait Real:
    RealField + Copy + FloatConst + ToPrimitive + Default + fmt::Display + Send + Sync + 'static
{
    /// Slack allowed when comparing angles against admissibility bounds.
    fn angle_tolerance() -> Self;
    /// Largest accepted max-norm of `L·vec(ρ)` for a steady state.
    fn residual_tolerance() -> Self;
    /// Relative pivot / singular-value size below which a matrix counts as rank deficient.
    fn rank_tolerance() -> Self;
    /// Largest accepted trace drift of the time-evolution oracle.
    fn trace_tolerance() -> Self;

    /// Converts an `f64` literal.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable in scalar type")
    }

    #[inline]
    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

macro_rules! impl_real {
    ($t:ty, angle = $a:expr, residual = $r:expr, rank = $k:expr, trace = $tr:expr) => {
        impl Real for $t {
            #[inline]
            fn angle_tolerance() -> Self {
                $a
            }
            #[inline]
            fn residual_tolerance() -> Self {
                $r
            }
            #[inline]
            fn rank_tolerance() -> Self {
                $k
            }
            #[inline]
            fn trace_tolerance() -> Self {
                $tr
            }
        }
    };
}

impl_real!(f64, angle = 1e-12, residual = 1e-10, rank = 1e-12, trace = 1e-9);
impl_real!(f32, angle = 1e-5, residual = 1e-3, rank = 1e-6, trace = 1e-3);

/// Complex number over the simulator scalar.
pub type C<T> = Complex<T>;

#[inline]
pub(crate) fn c<T: Real>(re: T, im: T) -> C<T> {
    Complex::new(re, im)
}

#[inline]
pub(crate) fn cr<T: Real>(re: T) -> C<T> {
    Complex::new(re, T::zero())
}

/// `exp(i·phase)` without relying on `num_traits::Float`.
#[inline]
pub(crate) fn cis<T: Real>(phase: T) -> C<T> {
    Complex::new(phase.cos(), phase.sin())
}

#[inline]
pub(crate) fn cabs<T: Real>(z: C<T>) -> T {
    (z.re * z.re + z.im * z.im).sqrt()
}
