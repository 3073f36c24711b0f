//! Scalar abstractions.
//!
//! Probability bookkeeping (degrees, pmfs, the GraField table, shrinkage
//! formulas) needs only field arithmetic, so it is written against
//! [`Scalar`] and runs unchanged on exact rationals. Anything that takes a
//! square root or an eigendecomposition needs [`Real`].

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FromPrimitive, Num, NumAssignOps, ToPrimitive};

/// Ordered field element: the minimum needed for probability arithmetic.
pub trait Scalar:
    Num + NumAssignOps + Clone + PartialOrd + FromPrimitive + ToPrimitive + Debug + Display + Send + Sync + 'static
{
    /// Lossy conversion from `f64`; panics only for values the type cannot hold at all.
    fn from_f64_lossy(x: f64) -> Self {
        Self::from_f64(x).expect("value not representable in scalar type")
    }

    fn from_count(n: usize) -> Self {
        Self::from_usize(n).expect("count not representable in scalar type")
    }

    fn as_f64(&self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    fn abs_val(&self) -> Self {
        if *self < Self::zero() {
            Self::zero() - self.clone()
        } else {
            self.clone()
        }
    }
}

impl<T> Scalar for T where
    T: Num
        + NumAssignOps
        + Clone
        + PartialOrd
        + FromPrimitive
        + ToPrimitive
        + Debug
        + Display
        + Send
        + Sync
        + 'static
{
}

/// Floating-point scalar used by the spectral machinery (f32 or f64).
pub trait Real: Scalar + Float + Copy + Sum + Default {
    /// Machine epsilon as a plain value.
    fn eps() -> Self {
        <Self as Float>::epsilon()
    }
}

impl<T> Real for T where T: Scalar + Float + Copy + Sum + Default {}
