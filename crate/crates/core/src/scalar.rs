//! Scalar abstraction shared by every solver.
//!
//! All numerics are written against [`Real`] so the same code runs in `f32`
//! for quick exploratory sweeps and in `f64` for validation runs.

use std::fmt::{Debug, Display, LowerExp};

use num_complex::Complex;
use num_traits::{Float, FloatConst};
use rustfft::FftNum;

/// A point in up to three spatial dimensions. Unused trailing axes are zero.
pub type Point<T> = [T; 3];

/// Floating point type usable by the solvers.
pub trait Real: Float + FloatConst + FftNum + Default + Debug + Display + LowerExp + Send + Sync + 'static {
    /// Converts an `f64` literal. Values outside the target range saturate.
    #[inline]
    fn lit(x: f64) -> Self {
        <Self as num_traits::NumCast>::from(x).unwrap_or_else(|| {
            if x.is_sign_negative() {
                Self::neg_infinity()
            } else {
                Self::infinity()
            }
        })
    }

    #[inline]
    fn count(n: usize) -> Self {
        Self::lit(n as f64)
    }

    /// Lossy conversion used for diagnostics and error payloads.
    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// `exp(i theta)`.
#[inline]
pub(crate) fn cis<T: Real>(theta: T) -> Complex<T> {
    Complex::new(theta.cos(), theta.sin())
}

#[inline]
pub(crate) fn dot<T: Real>(a: &Point<T>, b: &Point<T>) -> T {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

#[inline]
pub(crate) fn norm3<T: Real>(a: &Point<T>) -> T {
    dot(a, a).sqrt()
}

pub(crate) fn point_to_f64<T: Real>(p: &Point<T>) -> [f64; 3] {
    [p[0].as_f64(), p[1].as_f64(), p[2].as_f64()]
}
