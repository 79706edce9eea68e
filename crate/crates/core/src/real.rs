//! Scalar abstraction for all probability and rate arithmetic.
//!
//! Everything numerical in this crate (tensors, entropies, region terms,
//! capacity iterations) is generic over [`Real`], so the same code runs in
//! `f32` or `f64`. The crate root re-exports `f64` aliases, which is what the
//! CLI and the codec simulator use.

use std::fmt::{Debug, Display};
use std::iter::Sum;
use std::ops::{AddAssign, DivAssign, MulAssign, SubAssign};

use num_traits::{Float, FromPrimitive, ToPrimitive};

/// Floating-point scalar usable for probability mass and information rates.
pub trait Real:
    Float
    + FromPrimitive
    + ToPrimitive
    + AddAssign
    + SubAssign
    + MulAssign
    + DivAssign
    + Sum<Self>
    + Debug
    + Display
    + Send
    + Sync
    + 'static
{
    /// Absolute tolerance for stochasticity checks (row sums, unit mass).
    fn prob_tol() -> Self;
}

impl Real for f64 {
    fn prob_tol() -> Self {
        1e-12
    }
}

impl Real for f32 {
    // f32 cannot hold a 1e-12 absolute check on sums of many terms.
    fn prob_tol() -> Self {
        1e-5
    }
}

/// Shorthand for converting an `f64` literal into the working scalar.
#[inline]
pub(crate) fn r<R: Real>(x: f64) -> R {
    R::from_f64(x).expect("f64 literal must convert into the scalar type")
}
