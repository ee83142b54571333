//! Functionals of the propagation, smoothing and decay estimates, evaluated on
//! snapshots and accumulated in time, plus the dyadic oscillatory-kernel
//! check for the free group.
//!
//! Derivatives are global multipliers applied to the whole field; the
//! weight multiplies the result afterwards.

mod functionals;
pub mod kernel;
mod record;

pub use functionals::{
    decay_functional, decay_weight, halfstep_energy, halfstep_smoothing_density, kato_threshold, kato_window,
    local_sobolev, local_sobolev_with, smoothing_density, weighted_energy, weighted_energy_indicator,
    Channel, KatoWindow, LocalSobolev, Trapezoid, WindowDensity, LOCAL_SOBOLEV_B, LOCAL_SOBOLEV_EPS,
};
pub use kernel::{
    kernel_integral, kernel_samples, lattice_sum, oscillatory_kernel_check, KernelReport, KernelSample,
    LatticeSum,
};
pub use record::{
    DiagnosticsConfig, DiagnosticsRecord, DiagnosticsSummary, KatoSpec, LocalSobolevSpec, Recorder,
};
