//! Floating point abstraction shared by the grid, solver and pipeline modules.

use std::fmt::{Debug, Display, LowerExp};
use std::str::FromStr;

use num_traits::{Float, FromPrimitive, NumAssign};

/// Real scalar the numerical modules are generic over (`f32` or `f64`).
pub trait Scalar:
    'static
    + Float
    + NumAssign
    + FromPrimitive
    + Default
    + Debug
    + Display
    + LowerExp
    + FromStr
    + Send
    + Sync
{
    /// Converts an `f64` literal. Panics only if the target type cannot hold
    /// any finite value, which does not happen for `f32`/`f64`.
    #[inline]
    fn cst(x: f64) -> Self {
        Self::from_f64(x).unwrap()
    }

    #[inline]
    fn from_usize_(k: usize) -> Self {
        Self::from_usize(k).unwrap()
    }

    #[inline]
    fn from_isize_(k: isize) -> Self {
        Self::from_isize(k).unwrap()
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}

/// Formats a value as the shortest decimal string that parses back to the same
/// value. Positional notation in the usual range, exponent notation outside.
pub fn fmt_real<T: Scalar>(x: T) -> String {
    if x.is_nan() {
        return "nan".to_string();
    }
    if x.is_infinite() {
        return if x > T::zero() { "inf".into() } else { "-inf".into() };
    }
    let a = x.abs();
    if a == T::zero() || (a >= T::cst(1e-5) && a < T::cst(1e16)) {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}
