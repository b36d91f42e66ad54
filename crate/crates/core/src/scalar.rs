//! Scalar abstraction for the analytical routines.
//!
//! The chain construction and the dense solver only need field arithmetic,
//! an absolute value for pivoting and a total-enough order, so the same code
//! runs over `f32`, `f64` and exact rationals.

use std::fmt::Debug;

use num_traits::{FromPrimitive, Num, Signed, ToPrimitive};

/// Field-like number usable by the Markov analysis.
pub trait Scalar: Clone + Debug + PartialOrd + Num + Signed + FromPrimitive + ToPrimitive {
    /// Lossless conversion of a small count.
    fn from_count(n: u64) -> Self {
        Self::from_u64(n).expect("count representable in scalar type")
    }

    /// Nearest `f64`, for reporting.
    fn to_f64_lossy(&self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl<T> Scalar for T where T: Clone + Debug + PartialOrd + Num + Signed + FromPrimitive + ToPrimitive {}
