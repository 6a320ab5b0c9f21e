//! Numerical evaluation of the one-point distribution `F_T(s)` of the KPZ
//! equation / continuum directed polymer free energy with narrow-wedge
//! initial data, through three equivalent Fredholm determinant formulas, plus
//! the validation routes used to cross-check them.

pub mod crossover;
pub mod error;
pub mod fredholm;
pub mod kernels;
pub mod linalg;
pub mod painleve;
pub mod quadrature;
pub mod specfun;
pub mod wasep;

pub use error::{Error, Result};
pub use num_complex::Complex64;
