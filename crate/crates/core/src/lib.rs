//! Finite-dimensional models of Pfaffians, BV observables, homological
//! perturbation and determinant line bundles of operator families.

pub mod bv;
pub mod complexes;
pub mod error;
pub mod family;
pub mod graded;
pub mod matrix;
pub mod pfaffian;
pub mod scalar;
pub mod suite;

pub use error::{Error, Result};
pub use matrix::Matrix;
pub use scalar::{Rational, Scalar};
