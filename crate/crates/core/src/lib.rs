//! Fourier interpolation at perturbed square-root nodes.
//!
//! The numerical core is generic over [`scalar::Real`]; the aliases below fix
//! the scalar types used by the command-line front end and the test suites.

pub mod basis;
pub mod bounds_lab;
pub mod error;
pub mod interpolate;
pub mod modular;
pub mod nodes;
pub mod perturb_op;
pub mod qseries;
pub mod quadrature;
pub mod scalar;

pub use error::{FilError, Result};

/// Exact q-series with rational coefficients, in powers of q^{1/2}.
pub type QSeries = qseries::HalfQSeries<num_rational::BigRational>;
/// Exact rational polynomial.
pub type RationalPoly = qseries::RationalPolynomial<num_rational::BigRational>;
/// 256-bit working scalar for extended-precision evaluation.
pub type Mp256 = scalar::Mp<256>;
/// Basis evaluator in double precision.
pub type EvaluatorF64 = basis::BasisEvaluator<f64>;
/// Basis evaluator at 256 bits.
pub type EvaluatorMp = basis::BasisEvaluator<Mp256>;
