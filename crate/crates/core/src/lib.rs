//! Model-order estimation for discrete-time linear systems from sampled
//! responses, by the rank of the Hankel (responses) matrix.
//!
//! The numerical core is generic over the scalar: Hankel construction and
//! row echelon run on any [`Scalar`] including exact rationals, while SVD,
//! least squares and noise need a floating-point [`Real`]. The aliases below
//! fix the common instantiations.

pub mod cli;
pub mod dd;
pub mod error;
pub mod estimators;
pub mod experiments;
pub mod hankel;
pub mod io;
pub mod matrix;
pub mod rank;
pub mod scalar;
pub mod signal;
pub mod svd;

pub use dd::DoubleDouble;
pub use error::{Error, Result};
pub use hankel::{AugmentationSide, AugmentedHankel, HankelMatrix};
pub use matrix::Matrix;
pub use rank::{RankPolicy, RankResult, SingularSpectrum};
pub use scalar::{Real, Scalar};
pub use signal::{ModeSum, NoiseSpec, Signal};

use num_bigint::BigInt;
use num_rational::Ratio;

/// Exact scalar used by the rank oracle.
pub type Rational = Ratio<BigInt>;

pub type SignalF64 = Signal<f64>;
pub type SignalF32 = Signal<f32>;
pub type SignalDD = Signal<DoubleDouble>;
pub type RationalSignal = Signal<Rational>;
pub type MatrixF64 = Matrix<f64>;
pub type RationalMatrix = Matrix<Rational>;
pub type HankelF64 = HankelMatrix<f64>;
pub type RationalHankel = HankelMatrix<Rational>;
pub type SpectrumF64 = SingularSpectrum<f64>;
pub type SpectrumDD = SingularSpectrum<DoubleDouble>;
pub type ModeSumF64 = ModeSum<f64>;
