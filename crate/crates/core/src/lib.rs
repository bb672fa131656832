//! Alignment dynamics: Cucker-Smale particles, Fourier and graph spectral
//! gaps, Euler-alignment hydrodynamics and weighted Laplacians.
//!
//! The guide in `book/` walks through each module; its code blocks run as
//! doctests of this crate.

// `!(x > 0.0)` rejects NaN along with non-positive values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
#![allow(clippy::needless_range_loop)]

pub mod acceptance;
pub mod error;
pub mod experiments;
pub mod fourier;
pub mod geometry;
pub mod graph;
pub mod hydro;
pub mod linalg;
pub mod particles;
pub mod quad;
pub mod special;
pub mod weighted;

pub use error::{Error, Result};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../README.md")]
    mod readme {}
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/kernels.md")]
    mod kernels {}
    #[doc = include_str!("../../../book/src/fourier-gap.md")]
    mod fourier_gap {}
    #[doc = include_str!("../../../book/src/particles.md")]
    mod particles {}
    #[doc = include_str!("../../../book/src/hydrodynamics.md")]
    mod hydrodynamics {}
    #[doc = include_str!("../../../book/src/weighted-laplacian.md")]
    mod weighted_laplacian {}
    #[doc = include_str!("../../../book/src/experiments.md")]
    mod experiments {}
}
