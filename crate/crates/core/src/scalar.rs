//! Scalar abstraction for the numerical kernels.
//!
//! Everything in this crate is generic over [`Real`], which is `f32` or
//! `f64` in practice. Literals are written in `f64` and converted with
//! [`Real::of`], so the same kernel code drives both precisions.

use std::fmt::{Debug, Display, LowerExp};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive, NumAssign};

/// Floating-point scalar usable by every solver in the crate.
pub trait Real:
    Float + FloatConst + FromPrimitive + NumAssign + Sum + Debug + Display + LowerExp + Send + Sync + 'static
{
    /// Convert an `f64` literal. Panics only if the target type cannot
    /// represent ordinary finite constants, which does not happen for
    /// `f32`/`f64`.
    fn of(x: f64) -> Self {
        Self::from_f64(x).expect("finite literal")
    }

    fn of_usize(n: usize) -> Self {
        Self::from_usize(n).expect("grid size fits in scalar")
    }

    /// `self²` without the generic `powi` ceremony.
    fn sq(self) -> Self {
        self * self
    }
}

impl Real for f32 {}
impl Real for f64 {}
