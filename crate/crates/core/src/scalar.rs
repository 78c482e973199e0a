use std::fmt::{Debug, Display};
use std::str::FromStr;

use num_traits::{Float, FromPrimitive};

/// Floating point type the numeric kernels are written against.
///
/// `Display` followed by `FromStr` must round-trip exactly; both `f32` and
/// `f64` satisfy this with the standard library formatter, which the model
/// and Q-table files rely on.
pub trait Real:
    Float + FromPrimitive + Default + Display + Debug + FromStr + Send + Sync + 'static
{
    /// Converts an `f64` literal into `Self`.
    fn lit(v: f64) -> Self {
        Self::from_f64(v).expect("finite literal")
    }

    /// Widens (or passes through) to `f64`.
    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// Logistic sigmoid.
pub fn sigmoid<T: Real>(x: T) -> T {
    T::one() / (T::one() + (-x).exp())
}
