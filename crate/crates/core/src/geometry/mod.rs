//! Ambient domains and communication kernels.
//!
//! A [`DomainSpec`] is either the flat torus `[0, L)^d` with the
//! minimum-image metric or free space `R^d`. Kernels are radial profiles
//! scaled to unit mass by [`normalize_kernel`]; the matrix-valued kernels of
//! anticipation dynamics live in [`MatrixKernelSpec`].

mod domain;
mod kernel;
mod matrix;

pub use domain::{periodic_distance, DomainKind, DomainSpec};
pub(crate) use kernel::cube_integral;
pub use kernel::{
    eval_kernel, eval_topological, kernel_mass, mu_topological, normalize_kernel, profile_mass, KernelFamily,
    KernelSpec,
};
pub(crate) use matrix::hessian_into;
pub use matrix::{matrix_kernel_eval, AlignmentWeight, MatrixKernelSpec, Potential};
