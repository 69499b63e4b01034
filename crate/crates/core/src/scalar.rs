//! Scalar abstraction shared by every floating-point routine in the crate.
//!
//! Structural code (Hankel layout, row echelon over a field) is generic over
//! plain `num_traits` bounds so it also runs on exact rationals; numerical
//! code (SVD, least squares, noise) needs the [`Real`] bound below.

use std::fmt::{Debug, Display, LowerExp};

use num_traits::{Float, FromPrimitive, Signed, ToPrimitive};

use crate::dd::DoubleDouble;

/// Floating-point scalar usable by the numerical routines: `f32`, `f64`, or
/// [`DoubleDouble`] for clustered spectra below `f64` resolution.
pub trait Real:
    Float
    + Scalar
    + Signed
    + FromPrimitive
    + ToPrimitive
    + LowerExp
    + Display
    + Debug
    + Default
    + Send
    + Sync
    + 'static
{
    /// Lossy conversion from an `f64` literal or parameter.
    fn of(value: f64) -> Self {
        Self::from_f64(value).expect("f64 is representable in every Real")
    }

    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    /// Decimal text that parses back to the same value.
    fn to_decimal(self) -> String {
        format!("{:.16e}", self.as_f64())
    }

    fn parse_decimal(text: &str) -> Option<Self> {
        text.trim().parse::<f64>().ok().map(Self::of)
    }
}

impl Real for f32 {}
impl Real for f64 {}

impl Real for DoubleDouble {
    /// 34 significant digits: enough to round-trip ~106 bits.
    fn to_decimal(self) -> String {
        self.to_scientific(33)
    }

    fn parse_decimal(text: &str) -> Option<Self> {
        text.parse().ok()
    }
}

/// Any scalar a [`Signal`](crate::signal::Signal) or Hankel matrix may hold:
/// the floats, and exact rationals for the rank oracle.
pub trait Scalar: num_traits::Num + Clone + PartialOrd + Debug {
    fn is_finite_value(&self) -> bool;
}

impl Scalar for f32 {
    fn is_finite_value(&self) -> bool {
        self.is_finite()
    }
}

impl Scalar for f64 {
    fn is_finite_value(&self) -> bool {
        self.is_finite()
    }
}

impl Scalar for DoubleDouble {
    fn is_finite_value(&self) -> bool {
        self.is_finite()
    }
}

impl<I> Scalar for num_rational::Ratio<I>
where
    I: num_integer::Integer + Clone + Debug,
{
    fn is_finite_value(&self) -> bool {
        true
    }
}
