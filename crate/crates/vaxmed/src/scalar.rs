//! Probability arithmetic abstraction.
//!
//! The enumeration engine is generic over the numeric type carrying
//! probabilities. `f64` is the working type for simulation and reports,
//! `BigRational` gives exact arithmetic for oracle cross-checks, and `f32`
//! exists for memory-tight parameter sweeps.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive};
use std::fmt::Debug;

/// Numeric type usable for probabilities and expectations.
///
/// `Signed` brings the full ring operations plus `abs`; the two extra
/// methods cover exact construction from a ratio and lossy readout.
pub trait Scalar: Clone + Debug + PartialOrd + Signed {
    /// The value `num / den`, exact where the type allows it.
    fn from_ratio(num: i64, den: i64) -> Self;
    /// Nearest `f64`, for display and random sampling.
    fn to_f64(&self) -> f64;
}

impl Scalar for f64 {
    fn from_ratio(num: i64, den: i64) -> Self {
        num as f64 / den as f64
    }
    fn to_f64(&self) -> f64 {
        *self
    }
}

impl Scalar for f32 {
    fn from_ratio(num: i64, den: i64) -> Self {
        num as f32 / den as f32
    }
    fn to_f64(&self) -> f64 {
        f64::from(*self)
    }
}

impl Scalar for BigRational {
    fn from_ratio(num: i64, den: i64) -> Self {
        BigRational::new(BigInt::from(num), BigInt::from(den))
    }
    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }
}
