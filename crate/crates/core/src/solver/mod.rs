//! Time integration of `∂_t u = D^{α+1}∂_x u - u ∂_x u` on the periodic box.
//!
//! The dispersive part is applied exactly through an integrating factor; the
//! nonlinearity is advanced by classical RK4 in divergence form
//! `-½∂_x(u²)` with 2/3-rule dealiasing.

mod config;
mod conserved;
mod initial;
mod run;
mod stepper;

pub use config::{AbsorbingLayer, DriftTolerances, Nonlinearity, SimConfig, SCHEMA_VERSION};
pub use conserved::{conserved, Conserved};
pub use initial::{InitialData, Profile, DEFAULT_BOUNDARY_TOLERANCE};
pub use run::{run, Drift, DriftFlags, Observer, RunSummary, SeriesRow};
pub use stepper::{nonlinear_rhs, Stepper};
