//! Discrete Cucker–Smale dynamics and its three-zone extension.
//!
//! ```
//! use alignlab::geometry::{DomainSpec, KernelSpec};
//! use alignlab::particles::{cs_rhs, ParticleEnsemble};
//!
//! let domain = DomainSpec::free(1).unwrap();
//! let ens = ParticleEnsemble::new(vec![0.0, 1.0], vec![1.0, -1.0], domain).unwrap();
//! // constant kernel c = 1, τ = 1: a₁ = −(τc/2)(v₁ − v₂)
//! let a = cs_rhs(&ens, &KernelSpec::constant(1.0), 1.0).unwrap();
//! assert_eq!(a, vec![-1.0, 1.0]);
//! ```

mod diagnostics;
mod ensemble;
mod io;
mod rhs;
mod simulate;

pub use diagnostics::{component_velocity_diameters, diameter_bound, energy_fluctuation, flock_diameter, h_functional};
pub use ensemble::ParticleEnsemble;
pub use io::{load_ensemble_csv, parse_ensemble_csv, trace_csv, write_trace_csv};
pub use rhs::{cs_rhs, cs_rhs_cell_list, naive_cs_rhs, three_zone_rhs};
pub use simulate::{simulate, Dynamics, EnergyTrace, Integrator, SimConfig, SimOutput, Trajectory};
