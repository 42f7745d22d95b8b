//! Scalar abstraction shared by the measuring and scoring code.
//!
//! Geometry, text measurement, line breaking and the diversity metrics are
//! written against [`Scalar`] so they can run in `f32` (cheap previews) or
//! `f64` (the default used by the pipeline).

use std::fmt::{Debug, Display};

use num_traits::{Float, FromPrimitive, NumCast};

/// Floating point type usable by the engine: `f32` or `f64`.
pub trait Scalar:
    Float + FromPrimitive + NumCast + Debug + Display + Default + Send + Sync + 'static
{
    /// Converts an `f64` literal into this scalar.
    #[inline]
    fn lit(v: f64) -> Self {
        <Self as NumCast>::from(v).expect("f64 literal representable in scalar")
    }

    #[inline]
    fn count(n: usize) -> Self {
        <Self as NumCast>::from(n).expect("count representable in scalar")
    }

    #[inline]
    fn to_f64_lossy(self) -> f64 {
        <f64 as NumCast>::from(self).unwrap_or(f64::NAN)
    }

    /// Clamps into `[lo, hi]`; `lo` wins when the bounds are inverted.
    #[inline]
    fn clamp_to(self, lo: Self, hi: Self) -> Self {
        self.min(hi).max(lo)
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}

/// Tolerance used when comparing measured widths against a measure.
#[inline]
pub fn width_epsilon<S: Scalar>() -> S {
    S::lit(1e-6)
}
