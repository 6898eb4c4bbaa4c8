//! Scalar abstraction for probability tensors.
//!
//! Information measures only need a small slice of floating point arithmetic,
//! so every tensor in [`crate::prob`] is generic over [`Real`]. Tolerances are
//! part of the trait because single precision cannot honor the double
//! precision normalization bounds.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FloatConst, NumAssign};

pub trait Real:
    Float + FloatConst + NumAssign + Sum + Debug + Display + Default + Send + Sync + 'static
{
    /// Allowed deviation of a total mass from one.
    fn norm_tol() -> Self;
    /// Allowed deviation in information identities (bits).
    fn info_tol() -> Self;

    /// Lossless for f64, rounding for f32.
    fn of(x: f64) -> Self;

    fn of_usize(n: usize) -> Self {
        Self::of(n as f64)
    }

    fn to_f64_lossy(self) -> f64;

    /// `-p log2 p` with the `0 log 0 = 0` convention.
    fn plog2p(self) -> Self {
        if self > Self::zero() {
            -self * self.log2()
        } else {
            Self::zero()
        }
    }
}

impl Real for f64 {
    fn norm_tol() -> Self {
        1e-12
    }
    fn info_tol() -> Self {
        1e-9
    }
    fn of(x: f64) -> Self {
        x
    }
    fn to_f64_lossy(self) -> f64 {
        self
    }
}

impl Real for f32 {
    fn norm_tol() -> Self {
        1e-5
    }
    fn info_tol() -> Self {
        1e-4
    }
    fn of(x: f64) -> Self {
        x as f32
    }
    fn to_f64_lossy(self) -> f64 {
        self as f64
    }
}
