//! Numerical toolkit for Trotter product formulas with quadratic Hamiltonians.
//!
//! The pieces build on each other: linear symplectic flows, sampled fields on
//! uniform grids, metaplectic propagators, time-frequency norms, a discrete
//! Weyl calculus and finally the Trotter kernels themselves.

pub mod error;
pub mod fft;
pub mod grid;
pub mod linalg;
pub mod metaplectic;
pub mod rng;
pub mod symplectic;
pub mod tfa;
pub mod tolerances;
pub mod trotter;
pub mod weyl;

pub use error::{Error, Result};
pub use num_complex::Complex64;
