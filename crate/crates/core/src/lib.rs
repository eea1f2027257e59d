//! Exact computations around the six-term permutation statistic ρ*: pattern densities,
//! a flag-algebra certificate checker, constant-cover classification, step permutons
//! and a rank-based independence test.
//!
//! Numerical routines are generic over [`Scalar`], which is implemented for exact
//! [`Rational`] numbers and for `f32`/`f64`.

pub mod certificate;
pub mod cover;
pub mod error;
pub mod flag;
pub mod matrix;
pub mod perm;
pub mod permuton;
pub mod scalar;
pub mod stat;

pub use error::{Error, Result};
pub use matrix::Matrix;
pub use scalar::Scalar;

/// Arbitrary-precision rational number, always in lowest terms.
pub type Rational = num_rational::BigRational;
pub type RationalMatrix = Matrix<Rational>;
pub type FloatMatrix = Matrix<f64>;
