//! The density-weighted Laplacian `L_ρ = Λ_ρ − A_ρ` on a periodic grid.
//!
//! With cell-averaged kernel weights `κ`, the matrix is
//! `L_ab = δ_ab (φ*ρ)_a − κ_{a−b} √(ρ_a ρ_b)`. It annihilates `√ρ` exactly
//! and its quadratic form is `⟨L √ρ w, √ρ w⟩ = ½ Σ κ_{a−b} ρ_a ρ_b (w_a − w_b)²`.
//!
//! ```
//! use alignlab::fourier::{Grid, GridKernel};
//! use alignlab::geometry::{normalize_kernel, DomainSpec, KernelSpec};
//! use alignlab::weighted::{assemble_weighted_laplacian, lambda2_weighted};
//!
//! let dom = DomainSpec::standard_torus(1);
//! let grid = Grid::new(dom, 64).unwrap();
//! let phi = normalize_kernel(&KernelSpec::indicator(1.0), &dom).unwrap();
//! let gk = GridKernel::new(&phi, &grid).unwrap();
//! let l = assemble_weighted_laplacian(&vec![2.0; 64], &gk).unwrap();
//! let gap = lambda2_weighted(&l).unwrap();
//! assert!((gap.value - 2.0 * gk.sigma().0).abs() < 1e-10);
//! ```

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fourier::GridKernel;
use crate::graph::DecayCertificate;
use crate::linalg::{second_smallest, DenseMatrix, EigenMethod, LowEigenpair};

#[derive(Debug, Clone)]
pub struct WeightedLaplacianMatrix {
    pub matrix: DenseMatrix,
    /// The density samples `ρ_a`.
    pub weight: Vec<f64>,
    /// `h^d`.
    pub quadrature_weight: f64,
}

impl WeightedLaplacianMatrix {
    pub fn sqrt_weight(&self) -> Vec<f64> {
        self.weight.iter().map(|r| r.sqrt()).collect()
    }

    /// `‖L √ρ‖∞`.
    pub fn null_residual(&self) -> f64 {
        self.matrix.matvec(&self.sqrt_weight()).into_iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// `row col value` lines for the non-zero entries, after an `n nnz` header.
    pub fn to_triplets(&self) -> String {
        let n = self.matrix.dim();
        let mut body = String::new();
        let mut nnz = 0;
        for i in 0..n {
            for (j, v) in self.matrix.row(i).iter().enumerate() {
                if *v != 0.0 {
                    nnz += 1;
                    let _ = writeln!(body, "{i} {j} {v:.17e}");
                }
            }
        }
        format!("{n} {nnz}\n{body}")
    }
}

pub fn assemble_weighted_laplacian(rho: &[f64], gk: &GridKernel) -> Result<WeightedLaplacianMatrix> {
    let grid = gk.grid();
    let m = grid.len();
    if rho.len() != m {
        return Err(Error::DimensionMismatch { expected: m, found: rho.len() });
    }
    if rho.iter().any(|r| !(*r >= 0.0)) {
        return Err(Error::InvalidParameter("density must be non-negative".into()));
    }
    let phi_rho = gk.convolve_direct(rho);
    let sq: Vec<f64> = rho.iter().map(|r| r.sqrt()).collect();
    let mut matrix = DenseMatrix::zeros(m);
    for a in 0..m {
        for b in a..m {
            let v =
                if a == b { phi_rho[a] - gk.pair_weight(a, a) * rho[a] } else { -gk.pair_weight(a, b) * sq[a] * sq[b] };
            matrix.set(a, b, v);
            matrix.set(b, a, v);
        }
    }
    Ok(WeightedLaplacianMatrix { matrix, weight: rho.to_vec(), quadrature_weight: grid.cell_volume() })
}

/// Second eigenpair with `√ρ` deflated.
pub fn lambda2_weighted(l: &WeightedLaplacianMatrix) -> Result<LowEigenpair> {
    let n = l.matrix.dim();
    let mut pair = second_smallest(&l.matrix, &l.sqrt_weight(), EigenMethod::for_size(n))?;
    if pair.value < 0.0 && pair.value > -1e-10 * l.matrix.norm_inf().max(1.0) {
        pair.value = 0.0;
    }
    Ok(pair)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GapBoundReport {
    pub lambda2: f64,
    /// `½ σ c_ρ ρ₋`.
    pub bound: f64,
    pub c_rho: f64,
    pub rho_minus: f64,
    pub rho_plus: f64,
    /// `λ₂ / bound`.
    pub ratio: f64,
    pub pass: bool,
}

/// Compares `λ₂(L_ρ)` against `½ σ c_ρ ρ₋`.
pub fn verify_gap_bound(lambda2: f64, sigma: f64, rho: &[f64]) -> GapBoundReport {
    let rho_minus = rho.iter().copied().fold(f64::INFINITY, f64::min);
    let rho_plus = rho.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let c_rho = if rho_plus > 0.0 { rho_minus / rho_plus } else { 0.0 };
    let bound = 0.5 * sigma * c_rho * rho_minus;
    GapBoundReport {
        lambda2,
        bound,
        c_rho,
        rho_minus,
        rho_plus,
        ratio: if bound > 0.0 { lambda2 / bound } else { f64::INFINITY },
        pass: lambda2 >= bound - 1e-10,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KineticReport {
    /// `∬ φ |u − u′|² ρ ρ′`.
    pub lhs: f64,
    /// `(λ₂ / m₀) ∬ |u − u′|² ρ ρ′`.
    pub rhs: f64,
    pub margin: f64,
}

/// Both sides of the kinetic spectral-gap inequality by quadrature;
/// `u` holds one vector per velocity component.
pub fn kinetic_fluctuation_check(u: &[Vec<f64>], rho: &[f64], gk: &GridKernel, lambda2: f64) -> Result<KineticReport> {
    let grid = gk.grid();
    let m = grid.len();
    if let Some(c) = u.iter().map(Vec::len).chain([rho.len()]).find(|l| *l != m) {
        return Err(Error::DimensionMismatch { expected: m, found: c });
    }
    let hd = grid.cell_volume();
    let mass = grid.integrate(rho);
    if !(mass > 0.0) {
        return Err(Error::ZeroMass);
    }
    let (mut weighted, mut plain) = (0.0, 0.0);
    for a in 0..m {
        for b in 0..m {
            let du2: f64 = u.iter().map(|c| (c[a] - c[b]).powi(2)).sum();
            let rr = rho[a] * rho[b] * du2;
            weighted += gk.pair_weight(a, b) * rr;
            plain += rr;
        }
    }
    let lhs = weighted * hd;
    let rhs = lambda2 / mass * plain * hd * hd;
    Ok(KineticReport { lhs, rhs, margin: lhs - rhs })
}

/// Checks `δE(t) ≤ exp(−2τ ∫ min(λ₂, ρ₋)) δE(0) (1 + ε)` on sampled series.
pub fn spectral_flocking_certificate(
    times: &[f64],
    delta_e: &[f64],
    lambda2: &[f64],
    rho_minus: &[f64],
    tau: f64,
    epsilon: f64,
) -> Result<DecayCertificate> {
    let n = times.len();
    if delta_e.len() != n || lambda2.len() != n || rho_minus.len() != n || n == 0 {
        return Err(Error::MismatchedSeries(format!(
            "{n} times, {} δE, {} λ₂, {} ρ₋ samples",
            delta_e.len(),
            lambda2.len(),
            rho_minus.len()
        )));
    }
    let rate: Vec<f64> = lambda2.iter().zip(rho_minus).map(|(l, r)| l.min(*r)).collect();
    let e0 = delta_e[0];
    let mut integral = 0.0;
    let mut bound = Vec::with_capacity(n);
    let (mut worst, mut worst_time) = (if n == 1 { 0.0 } else { f64::NEG_INFINITY }, times[0]);
    for k in 0..n {
        if k > 0 {
            integral += 0.5 * (rate[k] + rate[k - 1]) * (times[k] - times[k - 1]);
        }
        let b = (-2.0 * tau * integral).exp() * e0;
        bound.push(b);
        if k > 0 {
            let m = if b > 0.0 {
                delta_e[k] / b - 1.0
            } else if delta_e[k] > 0.0 {
                f64::INFINITY
            } else {
                -1.0
            };
            if m > worst {
                worst = m;
                worst_time = times[k];
            }
        }
    }
    Ok(DecayCertificate { passed: worst <= epsilon, worst_margin: worst, worst_time, bound, epsilon })
}
