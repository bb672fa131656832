use serde::{Deserialize, Serialize};

use super::scheme::HydroTrace;
use super::{BlowUpReport, FieldState};
use crate::error::{Error, Result};
use crate::fourier::GridKernel;
use crate::linalg::{jacobi_eigen, DenseMatrix};

/// `½ ∫ |u − ū₀|² ρ`, via `½ (∫ |m|²/ρ − |∫ m|² / m₀)`.
pub fn field_energy_fluctuation(state: &FieldState) -> Result<f64> {
    let m0 = state.mass();
    if !(m0 > 0.0) {
        return Err(Error::ZeroMass);
    }
    let floor = state.vacuum_threshold();
    let mut kinetic = 0.0;
    for (a, r) in state.rho.iter().enumerate() {
        if *r >= floor {
            kinetic += state.momentum.iter().map(|m| m[a] * m[a]).sum::<f64>() / r;
        }
    }
    kinetic *= state.grid.cell_volume();
    let p2: f64 = state.total_momentum().iter().map(|p| p * p).sum();
    Ok((0.5 * (kinetic - p2 / m0)).max(0.0))
}

/// Central-difference velocity gradient: entry `[b * d + c]` holds `∂_c u_b`.
pub(crate) fn gradient_tensor(state: &FieldState) -> Vec<Vec<f64>> {
    let g = &state.grid;
    let d = g.dim();
    let inv = 1.0 / (2.0 * g.h());
    let u = state.velocity();
    let mut out = vec![vec![0.0; g.len()]; d * d];
    for (b, ub) in u.iter().enumerate() {
        for c in 0..d {
            let col = &mut out[b * d + c];
            for (a, slot) in col.iter_mut().enumerate() {
                *slot = (ub[g.shifted(a, c, 1)] - ub[g.shifted(a, c, -1)]) * inv;
            }
        }
    }
    out
}

/// Smallest eigenvalue of the symmetric part of the gradient at cell `a`.
pub(crate) fn lambda_min_sym(grad: &[Vec<f64>], a: usize, d: usize) -> f64 {
    let s = |b: usize, c: usize| 0.5 * (grad[b * d + c][a] + grad[c * d + b][a]);
    match d {
        1 => s(0, 0),
        2 => {
            let (p, q, r) = (s(0, 0), s(1, 1), s(0, 1));
            0.5 * (p + q) - (0.25 * (p - q) * (p - q) + r * r).sqrt()
        }
        _ => {
            let m = DenseMatrix::from_fn(d, s);
            jacobi_eigen(&m).map(|e| e.values[0]).unwrap_or(f64::NAN)
        }
    }
}

/// `min_x λ_min(∇_S u) + τ φ*ρ` and where it is attained.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdSample {
    pub time: f64,
    pub eta_min: f64,
    pub location: Vec<f64>,
    /// `min φ*ρ`.
    pub rho_phi_min: f64,
}

pub fn threshold_eta(state: &FieldState, gk: &GridKernel, tau: f64) -> ThresholdSample {
    let phi_rho = gk.convolve(&state.rho);
    let grad = gradient_tensor(state);
    let d = state.dim();
    let (mut best, mut at) = (f64::INFINITY, 0);
    for (a, pr) in phi_rho.iter().enumerate() {
        let eta = lambda_min_sym(&grad, a, d) + tau * pr;
        if eta < best {
            best = eta;
            at = a;
        }
    }
    ThresholdSample {
        time: state.time,
        eta_min: best,
        location: state.grid.point(at),
        rho_phi_min: phi_rho.iter().copied().fold(f64::INFINITY, f64::min),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdReport {
    pub times: Vec<f64>,
    pub eta_min_series: Vec<f64>,
    /// `½ min ρ₀`.
    pub eta_c: f64,
    /// `½ min φ*ρ₀`, the other reading of the threshold.
    pub eta_c_alt: f64,
    pub tolerance: f64,
    pub persists: bool,
    pub blowup_time: Option<f64>,
}

impl ThresholdReport {
    /// Judges persistence of `η ≥ η_c − tolerance` along a recorded trace.
    pub fn from_trace(
        initial: &FieldState,
        gk: &GridKernel,
        trace: &HydroTrace,
        tolerance: f64,
        blowup: Option<&BlowUpReport>,
    ) -> Self {
        let eta_c = 0.5 * initial.rho_min();
        let eta_c_alt = 0.5 * gk.convolve(&initial.rho).into_iter().fold(f64::INFINITY, f64::min);
        let persists = blowup.is_none() && trace.eta_min.iter().all(|e| *e >= eta_c - tolerance);
        Self {
            times: trace.times.clone(),
            eta_min_series: trace.eta_min.clone(),
            eta_c,
            eta_c_alt,
            tolerance,
            persists,
            blowup_time: blowup.map(|b| b.time),
        }
    }
}

/// `G = u_x + τ φ*ρ` on a one-dimensional grid.
pub(crate) fn invariant_field_1d(state: &FieldState, gk: &GridKernel, tau: f64) -> Vec<f64> {
    let grad = gradient_tensor(state);
    let phi_rho = gk.convolve(&state.rho);
    grad[0].iter().zip(&phi_rho).map(|(ux, p)| ux + tau * p).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InvariantReport {
    pub integral_initial: f64,
    /// `max_t |∫G(t) − ∫G(0)|`.
    pub max_drift: f64,
    pub min_g_series: Vec<f64>,
    pub initially_nonnegative: bool,
    pub stays_nonnegative: bool,
}

/// Tracks `∫G` and `min G` along stored one-dimensional snapshots.
pub fn lagrangian_invariant_1d(states: &[FieldState], gk: &GridKernel, tau: f64) -> Result<InvariantReport> {
    let first = states.first().ok_or_else(|| Error::MismatchedSeries("no snapshots".into()))?;
    if first.dim() != 1 {
        return Err(Error::DimensionMismatch { expected: 1, found: first.dim() });
    }
    let mut integrals = Vec::with_capacity(states.len());
    let mut mins = Vec::with_capacity(states.len());
    for s in states {
        let g = invariant_field_1d(s, gk, tau);
        integrals.push(s.grid.integrate(&g));
        mins.push(g.iter().copied().fold(f64::INFINITY, f64::min));
    }
    let i0 = integrals[0];
    let tol = 1e-10 * tau * first.mass();
    Ok(InvariantReport {
        integral_initial: i0,
        max_drift: integrals.iter().map(|i| (i - i0).abs()).fold(0.0, f64::max),
        initially_nonnegative: mins[0] >= 0.0,
        stays_nonnegative: mins.iter().all(|m| *m >= -tol),
        min_g_series: mins,
    })
}

/// `min ∇·u ≥ d (η_c − τ max φ*ρ)`, which follows pointwise from `η ≥ η_c`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DivergenceReport {
    pub min_divergence: f64,
    pub bound: f64,
    pub holds: bool,
}

pub fn divergence_check(state: &FieldState, gk: &GridKernel, tau: f64, eta_c: f64) -> DivergenceReport {
    let d = state.dim();
    let grad = gradient_tensor(state);
    let min_divergence =
        (0..state.grid.len()).map(|a| (0..d).map(|c| grad[c * d + c][a]).sum::<f64>()).fold(f64::INFINITY, f64::min);
    let phi_max = gk.convolve(&state.rho).into_iter().fold(f64::NEG_INFINITY, f64::max);
    let bound = d as f64 * (eta_c - tau * phi_max);
    DivergenceReport { min_divergence, bound, holds: min_divergence >= bound - 1e-12 * bound.abs().max(1.0) }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlockingCertificate {
    pub passed: bool,
    pub epsilon: f64,
    /// `max_{t>0} (δE / bound − 1)` for the time-dependent bound.
    pub worst_margin: f64,
    pub worst_time: f64,
    pub bound: Vec<f64>,
    /// `1 − max_t (ρ₊ − ρ₋) / m̄₀`; the gate is open when positive.
    pub density_constant: f64,
    pub gate_open: bool,
    /// Margin for the constant-rate bound `e^{−τ m̄₀ c² σ t}`, present when the gate is open.
    pub uniform_margin: Option<f64>,
    pub uniform_passed: Option<bool>,
}

/// Checks `δE(t) ≤ exp(−τσ ∫ c_ρ ρ₋) δE(0) (1 + ε)` along a trace, plus the
/// constant-rate bound when the density variation stays below the mean.
pub fn flocking_certificate(
    trace: &HydroTrace,
    sigma: f64,
    tau: f64,
    mean_density: f64,
    epsilon: f64,
) -> Result<FlockingCertificate> {
    let n = trace.times.len();
    if [trace.delta_e.len(), trace.rho_min.len(), trace.rho_max.len()].iter().any(|l| *l != n) {
        return Err(Error::MismatchedSeries("times, deltaE, rho_min and rho_max differ in length".into()));
    }
    if n == 0 {
        return Err(Error::MismatchedSeries("empty trace".into()));
    }
    let rate: Vec<f64> = trace.rho_min.iter().zip(&trace.rho_max).map(|(lo, hi)| lo * lo / hi).collect();
    let e0 = trace.delta_e[0];
    let mut integral = 0.0;
    let mut bound = Vec::with_capacity(n);
    let (mut worst, mut worst_time) = (f64::NEG_INFINITY, trace.times[0]);
    let mut passed = true;
    for i in 0..n {
        if i > 0 {
            integral += 0.5 * (rate[i] + rate[i - 1]) * (trace.times[i] - trace.times[i - 1]);
        }
        let b = (-tau * sigma * integral).exp() * e0;
        bound.push(b);
        let e = trace.delta_e[i];
        if e > b * (1.0 + epsilon) {
            passed = false;
        }
        let margin = if b > 0.0 {
            e / b - 1.0
        } else if e > 0.0 {
            f64::INFINITY
        } else {
            -1.0
        };
        // the first sample is an identity
        if (i > 0 || n == 1) && margin > worst {
            worst = margin;
            worst_time = trace.times[i];
        }
    }
    let spread = trace.rho_min.iter().zip(&trace.rho_max).map(|(lo, hi)| hi - lo).fold(0.0, f64::max);
    let c = 1.0 - spread / mean_density;
    let gate_open = c > 0.0;
    let (uniform_margin, uniform_passed) = if gate_open {
        let delta = tau * mean_density * c * c;
        let mut m = f64::NEG_INFINITY;
        let mut ok = true;
        for (i, (t, e)) in trace.times.iter().zip(&trace.delta_e).enumerate() {
            let b = (-delta * sigma * (t - trace.times[0])).exp() * e0;
            ok &= *e <= b * (1.0 + epsilon);
            if i > 0 || n == 1 {
                m = m.max(if b > 0.0 { e / b - 1.0 } else { -1.0 });
            }
        }
        (Some(m), Some(ok))
    } else {
        (None, None)
    };
    Ok(FlockingCertificate {
        passed,
        epsilon,
        worst_margin: worst,
        worst_time,
        bound,
        density_constant: c,
        gate_open,
        uniform_margin,
        uniform_passed,
    })
}
