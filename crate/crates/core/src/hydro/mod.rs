//! Pressureless Euler-alignment on the periodic grid.
//!
//! Unknowns are density and momentum; the transport part uses local
//! Lax-Friedrichs fluxes and the alignment source uses the cell-averaged
//! kernel of [`GridKernel`](crate::fourier::GridKernel), so every quantity
//! here shares the grid gap `σ_h`.

mod diagnostics;
mod io;
mod scheme;
mod state;

pub use diagnostics::{
    divergence_check, field_energy_fluctuation, flocking_certificate, lagrangian_invariant_1d, threshold_eta,
    DivergenceReport, FlockingCertificate, InvariantReport, ThresholdReport, ThresholdSample,
};
pub use io::{field_snapshot_csv, hydro_trace_csv, write_field_snapshot_csv, write_hydro_trace_csv};
pub use scheme::{
    alignment_force, convolve_density, hydro_step, max_face_gradient, run_hydro, stable_dt, HydroConfig, HydroRun,
    HydroTrace,
};
pub use state::{FieldState, VACUUM_FRACTION};

use std::fmt;

use serde::{Deserialize, Serialize};

/// Where and when a gradient blow-up was detected.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlowUpReport {
    pub time: f64,
    pub location: Vec<f64>,
    pub max_gradient: f64,
}

impl fmt::Display for BlowUpReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "t = {:.6}, |∇u| = {:.3e} at {:?}", self.time, self.max_gradient, self.location)
    }
}

#[cfg(test)]
mod tests;
