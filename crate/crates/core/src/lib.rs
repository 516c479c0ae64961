//! Zeta-corrected trapezoidal quadrature for weakly singular, singular and
//! hypersingular integrals with complex symmetric quadratic forms, and its
//! application to Helmholtz layer potentials on complexified surfaces.

pub mod cli;
pub mod epstein;
pub mod error;
pub mod helmholtz;
pub mod quadrature;
pub mod special;
pub mod surfaces;

pub use error::{Error, Result};
pub use num_complex::Complex64 as C64;
