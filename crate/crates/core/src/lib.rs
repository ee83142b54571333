//! Pseudo-spectral simulation and verification laboratory for the
//! dispersion-generalized Benjamin-Ono equation
//!
//! ```text
//! ∂_t u - D^{α+1} ∂_x u + u ∂_x u = 0,   0 <= α <= 1,
//! ```
//!
//! which interpolates between Benjamin-Ono (α = 0) and KdV (α = 1).

// `!(x > 0.0)` is used on purpose so that NaN parameters are rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod commutators;
pub mod cutoffs;
pub mod diagnostics;
pub mod error;
pub mod io;
pub mod quad;
pub mod solver;
pub mod spectral;

pub use error::{Error, Result};
pub use spectral::{Field, Grid, Multiplier};
