//! Scalar abstraction shared by every numerical routine in the crate.
//!
//! All tolerances in the crate are calibrated for `f64`. Lower precision
//! types raise each tolerance to a per-type floor so that tests comparing
//! against `1e-12` do not become meaningless in `f32`.

use nalgebra::RealField;
use num_complex::Complex;
use num_traits::ToPrimitive;

/// Real scalar usable by the operator algebra: `f64` and `f32` out of the box.
pub trait Real: RealField + Copy + ToPrimitive {
    /// Smallest tolerance that is meaningful for this type.
    const TOLERANCE_FLOOR: f64;

    /// Converts an `f64` literal into this scalar type.
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("every f64 literal is representable")
    }

    /// A tolerance calibrated for `f64`, raised to the type floor.
    fn tol(x: f64) -> Self {
        Self::lit(x.max(Self::TOLERANCE_FLOOR))
    }

    /// Lossy conversion used for reporting and error payloads.
    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Real for f64 {
    const TOLERANCE_FLOOR: f64 = 0.0;
}

impl Real for f32 {
    const TOLERANCE_FLOOR: f64 = 2e-5;
}

/// Complex number over a [`Real`] scalar.
pub type C<T> = Complex<T>;

#[inline]
pub(crate) fn cplx<T: Real>(re: T, im: T) -> C<T> {
    Complex::new(re, im)
}

#[inline]
pub(crate) fn creal<T: Real>(re: T) -> C<T> {
    Complex::new(re, T::zero())
}

#[inline]
pub(crate) fn cabs<T: Real>(c: C<T>) -> T {
    c.re.hypot(c.im)
}

/// `log2` that maps the `0 · log 0` convention onto zero.
#[inline]
pub(crate) fn xlog2x<T: Real>(x: T) -> T {
    if x <= T::zero() {
        T::zero()
    } else {
        x * x.log2()
    }
}
