//! Scalar abstractions shared by the scoring kernels.
//!
//! Two tiers are used:
//!
//! * [`Field`] covers exact arithmetic (ratios, counts turned into
//!   fractions). Betweenness, precision fractions, and Fleiss kappa only
//!   need the four field operations, so they can be evaluated over
//!   `num_rational::Ratio<i64>` as well as `f32`/`f64`.
//! * [`Real`] adds the transcendental functions needed by TF-IDF, the
//!   log-likelihood ratio, and standard errors.

use std::cmp::Ordering;
use std::fmt::Debug;

use num_traits::{Float, FromPrimitive, Num, ToPrimitive};

/// Numeric type closed under `+ - * /` with exact conversion from counts.
pub trait Field: Num + Copy + PartialOrd + FromPrimitive + Debug + Send + Sync + 'static {
    fn from_count(n: usize) -> Self {
        Self::from_usize(n).expect("count representable in scalar type")
    }
}

impl<T> Field for T where T: Num + Copy + PartialOrd + FromPrimitive + Debug + Send + Sync + 'static {}

/// Floating-point scalar (`f32` or `f64`).
pub trait Real: Field + Float + ToPrimitive {}

impl<T> Real for T where T: Field + Float + ToPrimitive {}

/// Total order for scores that are never NaN by construction.
#[inline]
pub(crate) fn cmp_scores<T: PartialOrd>(a: &T, b: &T) -> Ordering {
    a.partial_cmp(b).unwrap_or(Ordering::Equal)
}

/// Lossy view of a scalar as `f64`, used for reports and JSON output.
#[inline]
pub fn to_f64<T: ToPrimitive>(x: T) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}
