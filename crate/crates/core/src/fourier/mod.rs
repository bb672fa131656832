//! Fourier analysis of radial kernels on the torus.
//!
//! Two gap constants appear. The continuum
//! `σ_φ = 1 − max_{k≠0} ∫ φ(|x|) cos(2π k·x/L) dx` comes from
//! [`sigma_phi`]. On a periodic grid the cell-averaged kernel has its own
//! symbol, and [`GridKernel::sigma`] returns the matching `σ_h`; the two
//! agree to discretization error.
//!
//! ```
//! use alignlab::fourier::sigma_phi;
//! use alignlab::geometry::{normalize_kernel, DomainSpec, KernelSpec};
//!
//! let t1 = DomainSpec::standard_torus(1);
//! let phi = normalize_kernel(&KernelSpec::indicator(1.0), &t1).unwrap();
//! let gap = sigma_phi(&phi, &t1, 64).unwrap();
//! assert!((gap.sigma - (1.0 - 1f64.sin())).abs() < 1e-12);
//! ```

mod coefficients;
mod grid;
mod poincare;

pub use crate::special::bessel_j1;
pub use coefficients::{
    default_k_max, kernel_fourier_coefficient, sigma_phi, tail_variation, trapezoid_coefficient, FourierGapResult,
    ModeCoefficient,
};
pub use grid::{Grid, GridKernel, DEFAULT_SUBSAMPLES};
pub use poincare::{pair_energy, pair_energy_spectral, poincare_check, poincare_check_with_sigma, PoincareReport};
