//! Numeric type used for supports and confidences.
//!
//! Every frequency in this crate is a ratio of two counts (transactions
//! containing an itemset over all transactions, games exhibiting an effect
//! over games containing a pair, ...). [`Frequency`] abstracts over the
//! concrete representation so the same mining and ranking code runs on
//! `f32`, `f64`, or an exact rational.

use std::fmt::Debug;

use num_rational::Ratio;
use num_traits::{One, ToPrimitive, Zero};

/// A fraction in `[0, 1]` built from integer counts.
///
/// Values are always produced through [`Frequency::from_counts`], so two
/// frequencies derived from the same pair of counts compare equal
/// regardless of the route that computed them.
pub trait Frequency: Clone + PartialOrd + Debug + Zero + One + Send + Sync + 'static {
    /// `numerator / denominator`. `denominator` must be non-zero.
    fn from_counts(numerator: usize, denominator: usize) -> Self;

    /// Lossy conversion for display and JSON output.
    fn to_f64(&self) -> f64;

    /// `true` when the value lies in `(0, 1]`.
    fn is_unit_fraction(&self) -> bool {
        *self > Self::zero() && *self <= Self::one()
    }
}

macro_rules! float_frequency {
    ($t:ty) => {
        impl Frequency for $t {
            #[inline]
            fn from_counts(numerator: usize, denominator: usize) -> Self {
                debug_assert!(denominator > 0);
                numerator as $t / denominator as $t
            }

            #[inline]
            fn to_f64(&self) -> f64 {
                ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
            }
        }
    };
}

float_frequency!(f32);
float_frequency!(f64);

impl Frequency for Ratio<u64> {
    fn from_counts(numerator: usize, denominator: usize) -> Self {
        Ratio::new(numerator as u64, denominator as u64)
    }

    fn to_f64(&self) -> f64 {
        *self.numer() as f64 / *self.denom() as f64
    }
}

/// Exact rational frequency.
pub type Exact = Ratio<u64>;
