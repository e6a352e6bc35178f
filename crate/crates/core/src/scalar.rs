use std::fmt::{Debug, Display};

use num_traits::{Float, FromPrimitive, ToPrimitive};
use serde::Serialize;

/// Floating-point scalar used for densities, shares and summary statistics.
pub trait Real:
    Float + FromPrimitive + ToPrimitive + Debug + Display + Default + Send + Sync + 'static
{
    fn from_count(n: usize) -> Self {
        Self::from_usize(n).expect("count fits in a float")
    }

    fn from_f64_lossy(x: f64) -> Self {
        Self::from_f64(x).expect("finite value")
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// `num / den`, or zero when the denominator is zero.
pub fn ratio<T: Real>(num: usize, den: usize) -> T {
    if den == 0 {
        T::zero()
    } else {
        T::from_count(num) / T::from_count(den)
    }
}

/// `100 * num / den`, or zero when the denominator is zero.
pub fn percent<T: Real>(num: usize, den: usize) -> T {
    ratio::<T>(num, den) * T::from_count(100)
}

/// Mean and population standard deviation.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct MeanSd<T> {
    pub mean: T,
    pub sd: T,
}

impl<T: Real> MeanSd<T> {
    pub fn of(values: &[T]) -> Self {
        if values.is_empty() {
            return MeanSd {
                mean: T::zero(),
                sd: T::zero(),
            };
        }
        let n = T::from_count(values.len());
        let mean = values.iter().fold(T::zero(), |acc, &v| acc + v) / n;
        let var = values
            .iter()
            .fold(T::zero(), |acc, &v| acc + (v - mean) * (v - mean))
            / n;
        MeanSd {
            mean,
            sd: var.sqrt(),
        }
    }
}
