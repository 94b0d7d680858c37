//! Scalar abstractions.

use std::fmt::Debug;

use num_rational::BigRational;
use num_traits::{Float, FromPrimitive, Num, Signed, ToPrimitive};

/// A number type closed under field operations, used for probabilities,
/// frequencies and losses.
///
/// Implemented for `f32`, `f64` and [`BigRational`]. Rational instances
/// give exact answers for counting-based quantities such as risk and
/// total-variation distance.
pub trait Scalar:
    Num + Signed + Clone + PartialOrd + Debug + FromPrimitive + ToPrimitive + Send + Sync
{
    /// `num / den` as a scalar. `den` must be non-zero.
    fn ratio(num: u64, den: u64) -> Self {
        Self::from_count(num) / Self::from_count(den)
    }

    fn from_count(n: u64) -> Self {
        Self::from_u64(n).expect("count representable in scalar")
    }

    /// Lossy conversion used for reporting.
    fn to_f64_lossy(&self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    fn max_of(self, other: Self) -> Self {
        if other > self {
            other
        } else {
            self
        }
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}

impl Scalar for BigRational {
    fn ratio(num: u64, den: u64) -> Self {
        BigRational::new(num.into(), den.into())
    }
}

/// A floating scalar: everything in [`Scalar`] plus `ln`, `exp` and infinities.
pub trait Real: Scalar + Float {}

impl Real for f32 {}
impl Real for f64 {}
