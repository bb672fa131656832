use serde::{Deserialize, Serialize};

use super::diagnostics::{field_energy_fluctuation, gradient_tensor, invariant_field_1d, lambda_min_sym};
use super::{BlowUpReport, FieldState};
use crate::error::{Error, Result};
use crate::fourier::GridKernel;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HydroConfig {
    pub tau: f64,
    #[serde(default = "default_cfl")]
    pub cfl: f64,
    pub t_end: f64,
    /// Blow-up is declared when a face gradient `|Δu|/h` exceeds this
    /// multiple of `max(initial max gradient, τ m₀/|Ω|)`.
    #[serde(default = "default_blowup_factor")]
    pub blowup_gradient_factor: f64,
    #[serde(default = "one")]
    pub record_every: usize,
    /// Keep full field snapshots every this many steps.
    #[serde(default)]
    pub snapshot_every: Option<usize>,
}

fn default_cfl() -> f64 {
    0.4
}

fn default_blowup_factor() -> f64 {
    1e3
}

fn one() -> usize {
    1
}

impl HydroConfig {
    pub fn new(tau: f64, t_end: f64) -> Self {
        Self {
            tau,
            cfl: default_cfl(),
            t_end,
            blowup_gradient_factor: default_blowup_factor(),
            record_every: 1,
            snapshot_every: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.cfl > 0.0 && self.cfl < 1.0) {
            return Err(Error::InvalidParameter(format!("cfl must lie in (0, 1), got {}", self.cfl)));
        }
        if !(self.tau > 0.0 && self.tau.is_finite()) {
            return Err(Error::InvalidParameter(format!("tau must be positive, got {}", self.tau)));
        }
        if !(self.t_end >= 0.0 && self.t_end.is_finite()) {
            return Err(Error::InvalidParameter(format!("t_end must be non-negative, got {}", self.t_end)));
        }
        if !(self.blowup_gradient_factor > 0.0) {
            return Err(Error::InvalidParameter("blow-up factor must be positive".into()));
        }
        if self.record_every == 0 || self.snapshot_every == Some(0) {
            return Err(Error::InvalidParameter("sampling intervals must be at least 1".into()));
        }
        Ok(())
    }
}

/// `(φ * ρ)` on the grid.
pub fn convolve_density(gk: &GridKernel, state: &FieldState) -> Vec<f64> {
    gk.convolve(&state.rho)
}

/// Alignment source `τ ρ [(φ * (ρu)) − u (φ * ρ)] = τ [ρ (φ*m) − m (φ*ρ)]`,
/// one vector per axis.
pub fn alignment_force(state: &FieldState, gk: &GridKernel, tau: f64) -> Vec<Vec<f64>> {
    let phi_rho = gk.convolve(&state.rho);
    alignment_with(state, gk, tau, &phi_rho)
}

fn alignment_with(state: &FieldState, gk: &GridKernel, tau: f64, phi_rho: &[f64]) -> Vec<Vec<f64>> {
    state
        .momentum
        .iter()
        .map(|m| {
            let phi_m = gk.convolve(m);
            (0..m.len()).map(|a| tau * (state.rho[a] * phi_m[a] - m[a] * phi_rho[a])).collect()
        })
        .collect()
}

/// Largest face gradient `|u_{i+1} − u_i| / h` and the face centre where it occurs.
pub fn max_face_gradient(state: &FieldState) -> (f64, Vec<f64>) {
    let g = &state.grid;
    let h = g.h();
    let u = state.velocity();
    let mut best = 0.0;
    let mut at = vec![0.0; g.dim()];
    for axis in 0..g.dim() {
        for i in 0..g.len() {
            let j = g.shifted(i, axis, 1);
            for c in &u {
                let v = (c[j] - c[i]).abs() / h;
                if !(v <= best) {
                    best = v;
                    at = g.point(i);
                    at[axis] += 0.5 * h;
                }
            }
        }
    }
    (best, at)
}

/// Time step obeying both the transport CFL and the alignment-rate limit.
pub fn stable_dt(state: &FieldState, gk: &GridKernel, config: &HydroConfig) -> f64 {
    let u = state.velocity();
    let speed: f64 = u.iter().map(|c| c.iter().fold(0.0_f64, |m, v| m.max(v.abs()))).sum();
    let phi_rho_max = gk.convolve(&state.rho).into_iter().fold(0.0, f64::max);
    let mut dt = f64::INFINITY;
    if speed > 0.0 {
        dt = dt.min(config.cfl * state.grid.h() / speed);
    }
    if phi_rho_max > 0.0 {
        dt = dt.min(config.cfl / (config.tau * phi_rho_max));
    }
    dt
}

/// Semi-discrete right-hand side: LLF flux divergence plus alignment.
fn rhs(state: &FieldState, gk: &GridKernel, tau: f64) -> (Vec<f64>, Vec<Vec<f64>>) {
    let g = &state.grid;
    let d = g.dim();
    let h = g.h();
    let u = state.velocity();
    let mut drho = vec![0.0; g.len()];
    let mut dm = alignment_force(state, gk, tau);
    for axis in 0..d {
        let ua = &u[axis];
        for i in 0..g.len() {
            let j = g.shifted(i, axis, 1);
            let alpha = ua[i].abs().max(ua[j].abs());
            let frho =
                0.5 * (state.rho[i] * ua[i] + state.rho[j] * ua[j]) - 0.5 * alpha * (state.rho[j] - state.rho[i]);
            drho[i] -= frho / h;
            drho[j] += frho / h;
            for (b, m) in state.momentum.iter().enumerate() {
                let f = 0.5 * (m[i] * ua[i] + m[j] * ua[j]) - 0.5 * alpha * (m[j] - m[i]);
                dm[b][i] -= f / h;
                dm[b][j] += f / h;
            }
        }
    }
    (drho, dm)
}

fn euler(state: &FieldState, dt: f64, k: &(Vec<f64>, Vec<Vec<f64>>)) -> FieldState {
    let mut s = state.clone();
    s.rho.iter_mut().zip(&k.0).for_each(|(r, d)| *r += dt * d);
    for (m, dm) in s.momentum.iter_mut().zip(&k.1) {
        m.iter_mut().zip(dm).for_each(|(v, d)| *v += dt * d);
    }
    s.time += dt;
    s
}

/// One Heun step of size `dt`; fails with a blow-up report when the state
/// turns non-finite or a face gradient exceeds `gradient_cap`.
pub fn hydro_step(state: &FieldState, gk: &GridKernel, tau: f64, dt: f64, gradient_cap: f64) -> Result<FieldState> {
    let k1 = rhs(state, gk, tau);
    let s1 = euler(state, dt, &k1);
    let k2 = rhs(&s1, gk, tau);
    let s2 = euler(&s1, dt, &k2);
    let mut next = state.clone();
    next.rho.iter_mut().zip(&s2.rho).for_each(|(r, b)| *r = 0.5 * (*r + b));
    for (m, mb) in next.momentum.iter_mut().zip(&s2.momentum) {
        m.iter_mut().zip(mb).for_each(|(v, b)| *v = 0.5 * (*v + b));
    }
    next.time = state.time + dt;
    if !next.is_finite() {
        return Err(Error::BlowUp(BlowUpReport { time: next.time, location: vec![], max_gradient: f64::INFINITY }));
    }
    let (grad, at) = max_face_gradient(&next);
    if grad > gradient_cap {
        return Err(Error::BlowUp(BlowUpReport { time: next.time, location: at, max_gradient: grad }));
    }
    Ok(next)
}

/// Sampled diagnostics of a hydrodynamic run.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct HydroTrace {
    pub times: Vec<f64>,
    #[serde(rename = "deltaE")]
    pub delta_e: Vec<f64>,
    pub rho_min: Vec<f64>,
    pub rho_max: Vec<f64>,
    pub eta_min: Vec<f64>,
    pub mass: Vec<f64>,
    pub momentum: Vec<Vec<f64>>,
    pub max_gradient: Vec<f64>,
    /// `∫ (u_x + τ φ*ρ)`, one-dimensional runs only.
    pub invariant_integral: Option<Vec<f64>>,
}

#[derive(Debug, Clone)]
pub struct HydroRun {
    pub trace: HydroTrace,
    pub final_state: FieldState,
    pub blowup: Option<BlowUpReport>,
    pub snapshots: Vec<FieldState>,
    pub steps: usize,
    pub gradient_cap: f64,
}

fn record(trace: &mut HydroTrace, s: &FieldState, gk: &GridKernel, tau: f64) -> Result<()> {
    let phi_rho = gk.convolve(&s.rho);
    trace.times.push(s.time);
    trace.delta_e.push(field_energy_fluctuation(s)?);
    trace.rho_min.push(s.rho_min());
    trace.rho_max.push(s.rho_max());
    let grad = gradient_tensor(s);
    let eta =
        (0..s.grid.len()).map(|a| lambda_min_sym(&grad, a, s.dim()) + tau * phi_rho[a]).fold(f64::INFINITY, f64::min);
    trace.eta_min.push(eta);
    trace.mass.push(s.mass());
    trace.momentum.push(s.total_momentum());
    trace.max_gradient.push(max_face_gradient(s).0);
    if let Some(series) = trace.invariant_integral.as_mut() {
        series.push(s.grid.integrate(&invariant_field_1d(s, gk, tau)));
    }
    Ok(())
}

/// Integrates to `t_end`, or until blow-up, which is reported in the run
/// rather than as an error.
pub fn run_hydro(initial: &FieldState, gk: &GridKernel, config: &HydroConfig) -> Result<HydroRun> {
    config.validate()?;
    if gk.grid() != &initial.grid {
        return Err(Error::InvalidParameter("kernel grid does not match the state grid".into()));
    }
    let mean_density = initial.mass() / initial.grid.domain.volume().expect("torus");
    let g0 = max_face_gradient(initial).0;
    let gradient_cap = config.blowup_gradient_factor * g0.max(config.tau * mean_density);
    let mut trace = HydroTrace { invariant_integral: (initial.dim() == 1).then(Vec::new), ..Default::default() };
    record(&mut trace, initial, gk, config.tau)?;
    let mut snapshots = Vec::new();
    if config.snapshot_every.is_some() {
        snapshots.push(initial.clone());
    }
    let mut state = initial.clone();
    let mut steps = 0;
    let mut blowup = None;
    while state.time < config.t_end {
        let remaining = config.t_end - state.time;
        let mut dt = stable_dt(&state, gk, config);
        if dt >= remaining {
            dt = remaining;
        } else if dt > 0.5 * remaining {
            // avoid a sliver of a final step
            dt = 0.5 * remaining;
        }
        match hydro_step(&state, gk, config.tau, dt, gradient_cap) {
            Ok(next) => state = next,
            Err(Error::BlowUp(report)) => {
                blowup = Some(report);
                break;
            }
            Err(e) => return Err(e),
        }
        if dt == remaining {
            state.time = config.t_end;
        }
        steps += 1;
        let last = state.time >= config.t_end;
        if steps % config.record_every == 0 || last {
            record(&mut trace, &state, gk, config.tau)?;
        }
        if let Some(every) = config.snapshot_every {
            if steps % every == 0 || last {
                snapshots.push(state.clone());
            }
        }
    }
    Ok(HydroRun { trace, final_state: state, blowup, snapshots, steps, gradient_cap })
}
