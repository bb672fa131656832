use serde::{Deserialize, Serialize};

use super::diagnostics::{component_velocity_diameters, energy_fluctuation, flock_diameter};
use super::rhs::{cs_rhs, cs_rhs_cell_list, three_zone_rhs};
use super::ParticleEnsemble;
use crate::error::{Error, Result};
use crate::geometry::{KernelSpec, MatrixKernelSpec};
use crate::graph::{adjacency, fiedler, graph_laplacian, LaplacianScaling};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Integrator {
    #[default]
    Rk4,
    Euler,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub tau: f64,
    pub dt: f64,
    pub t_end: f64,
    #[serde(default)]
    pub integrator: Integrator,
    #[serde(default = "one")]
    pub record_every: usize,
    /// Also record λ₂ of the scaled graph Laplacian at each sample.
    #[serde(default)]
    pub record_fiedler: bool,
    /// Keep full position/velocity snapshots at each sample.
    #[serde(default)]
    pub keep_trajectory: bool,
}

fn one() -> usize {
    1
}

impl SimConfig {
    pub fn new(tau: f64, dt: f64, t_end: f64) -> Self {
        Self {
            tau,
            dt,
            t_end,
            integrator: Integrator::Rk4,
            record_every: 1,
            record_fiedler: false,
            keep_trajectory: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::InvalidParameter(format!("dt must be positive, got {}", self.dt)));
        }
        if !(self.t_end >= 0.0 && self.t_end.is_finite()) {
            return Err(Error::InvalidParameter(format!("t_end must be non-negative, got {}", self.t_end)));
        }
        if !(self.tau > 0.0 && self.tau.is_finite()) {
            return Err(Error::InvalidParameter(format!("tau must be positive, got {}", self.tau)));
        }
        if self.record_every == 0 {
            return Err(Error::InvalidParameter("record_every must be at least 1".into()));
        }
        Ok(())
    }
}

/// Which force law drives the velocities.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "dynamics", rename_all = "kebab-case")]
pub enum Dynamics {
    Alignment { kernel: KernelSpec },
    ThreeZone { kernel: MatrixKernelSpec },
}

impl Dynamics {
    fn acceleration(&self, ens: &ParticleEnsemble, tau: f64) -> Result<Vec<f64>> {
        match self {
            Dynamics::Alignment { kernel } => {
                if kernel.family.support_radius().is_some() && !kernel.is_topological() && ens.n() >= 512 {
                    cs_rhs_cell_list(ens, kernel, tau)
                } else {
                    cs_rhs(ens, kernel, tau)
                }
            }
            Dynamics::ThreeZone { kernel } => three_zone_rhs(ens, kernel, tau),
        }
    }
}

/// Sampled diagnostics of a run.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct EnergyTrace {
    pub times: Vec<f64>,
    #[serde(rename = "deltaE")]
    pub delta_e: Vec<f64>,
    pub diameter: Vec<f64>,
    pub velocity_diameter: Vec<f64>,
    /// `max_k V_k`, the largest per-component velocity spread.
    pub component_spread: Vec<f64>,
    pub fiedler: Option<Vec<f64>>,
}

impl EnergyTrace {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub positions: Vec<Vec<f64>>,
    pub velocities: Vec<Vec<f64>>,
}

#[derive(Debug, Clone)]
pub struct SimOutput {
    pub final_state: ParticleEnsemble,
    pub trace: EnergyTrace,
    pub trajectory: Trajectory,
    pub steps: usize,
}

fn record(
    t: f64,
    ens: &ParticleEnsemble,
    dynamics: &Dynamics,
    config: &SimConfig,
    trace: &mut EnergyTrace,
    traj: &mut Trajectory,
) -> Result<()> {
    let (d, v) = flock_diameter(ens);
    trace.times.push(t);
    trace.delta_e.push(energy_fluctuation(ens));
    trace.diameter.push(d);
    trace.velocity_diameter.push(v);
    trace.component_spread.push(component_velocity_diameters(ens).into_iter().fold(0.0, f64::max));
    if let (Some(series), Dynamics::Alignment { kernel }) = (trace.fiedler.as_mut(), dynamics) {
        let lap = graph_laplacian(&adjacency(ens, kernel)?, LaplacianScaling::PerAgent);
        series.push(fiedler(&lap)?.lambda2);
    }
    if config.keep_trajectory {
        traj.times.push(t);
        traj.positions.push(ens.positions().to_vec());
        traj.velocities.push(ens.velocities().to_vec());
    }
    Ok(())
}

fn sentinel(t: f64, ens: &ParticleEnsemble) -> Result<()> {
    let d = ens.dim();
    for (i, (x, v)) in ens.positions().chunks_exact(d).zip(ens.velocities().chunks_exact(d)).enumerate() {
        let speed = v.iter().map(|c| c * c).sum::<f64>().sqrt();
        if !(speed <= 1e8) || x.iter().any(|c| !c.is_finite()) {
            return Err(Error::ParticleBlowUp { time: t, agent: i, speed });
        }
    }
    Ok(())
}

fn axpy(base: &[f64], h: f64, k: &[f64]) -> Vec<f64> {
    base.iter().zip(k).map(|(b, k)| b + h * k).collect()
}

/// Integrates the ensemble with fixed steps up to `t_end` (the last step is
/// shortened to land on it), sampling every `record_every` steps and at the end.
pub fn simulate(ensemble: &ParticleEnsemble, dynamics: &Dynamics, config: &SimConfig) -> Result<SimOutput> {
    config.validate()?;
    let mut ens = ensemble.clone();
    let mut trace = EnergyTrace { fiedler: config.record_fiedler.then(Vec::new), ..Default::default() };
    let mut traj = Trajectory::default();
    record(0.0, &ens, dynamics, config, &mut trace, &mut traj)?;
    let steps = (config.t_end / config.dt - 1e-9).ceil().max(0.0) as usize;
    let tau = config.tau;
    let mut stage = ens.clone();
    for step in 0..steps {
        let t = step as f64 * config.dt;
        let t_next = if step + 1 == steps { config.t_end } else { (step + 1) as f64 * config.dt };
        let h = t_next - t;
        let x0 = ens.positions().to_vec();
        let v0 = ens.velocities().to_vec();
        match config.integrator {
            Integrator::Euler => {
                let a = dynamics.acceleration(&ens, tau)?;
                ens.set_state(&axpy(&x0, h, &v0), &axpy(&v0, h, &a));
            }
            Integrator::Rk4 => {
                let a1 = dynamics.acceleration(&ens, tau)?;
                let v1 = v0.clone();
                stage.set_state(&axpy(&x0, 0.5 * h, &v1), &axpy(&v0, 0.5 * h, &a1));
                let a2 = dynamics.acceleration(&stage, tau)?;
                let v2 = stage.velocities().to_vec();
                stage.set_state(&axpy(&x0, 0.5 * h, &v2), &axpy(&v0, 0.5 * h, &a2));
                let a3 = dynamics.acceleration(&stage, tau)?;
                let v3 = stage.velocities().to_vec();
                stage.set_state(&axpy(&x0, h, &v3), &axpy(&v0, h, &a3));
                let a4 = dynamics.acceleration(&stage, tau)?;
                let v4 = stage.velocities().to_vec();
                let comb = |k1: &[f64], k2: &[f64], k3: &[f64], k4: &[f64], base: &[f64]| -> Vec<f64> {
                    (0..base.len()).map(|i| base[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i])).collect()
                };
                ens.set_state(&comb(&v1, &v2, &v3, &v4, &x0), &comb(&a1, &a2, &a3, &a4, &v0));
            }
        }
        sentinel(t_next, &ens)?;
        if (step + 1) % config.record_every == 0 || step + 1 == steps {
            record(t_next, &ens, dynamics, config, &mut trace, &mut traj)?;
        }
    }
    Ok(SimOutput { final_state: ens, trace, trajectory: traj, steps })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{normalize_kernel, DomainSpec, KernelFamily, Potential};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::TAU;

    #[test]
    fn zero_velocity_is_a_fixed_point() {
        let t1 = DomainSpec::standard_torus(1);
        let k = normalize_kernel(&KernelSpec::indicator(1.0), &t1).unwrap();
        let ens = ParticleEnsemble::new(vec![0.5, 1.0, 4.0], vec![0.0; 3], t1).unwrap();
        let out = simulate(&ens, &Dynamics::Alignment { kernel: k }, &SimConfig::new(1.0, 0.01, 1.0)).unwrap();
        assert_eq!(out.final_state.positions(), ens.positions());
        assert!(out.trace.delta_e.iter().all(|&e| e == 0.0));
        assert_eq!(out.trace.len(), 101);
        assert_eq!(*out.trace.times.last().unwrap(), 1.0);
    }

    #[test]
    fn two_agents_decay_at_closed_form_rate() {
        let t1 = DomainSpec::standard_torus(1);
        let k = normalize_kernel(&KernelSpec::new(KernelFamily::Constant), &t1).unwrap();
        assert!((k.scale - 1.0 / TAU).abs() < 1e-15);
        let ens = ParticleEnsemble::new(vec![1.0, 2.0], vec![0.5, -0.5], t1).unwrap();
        let out = simulate(&ens, &Dynamics::Alignment { kernel: k }, &SimConfig::new(1.0, 0.01, 3.0)).unwrap();
        let v = out.final_state.velocities();
        // d(v₁−v₂)/dt = −(τ/N)·2φ(v₁−v₂) = −τφ(v₁−v₂)
        let want = (-3.0 / TAU).exp();
        assert!(((v[0] - v[1]) - want).abs() < 1e-12);
    }

    #[test]
    fn momentum_maximum_principle_and_monotone_decay() {
        let t2 = DomainSpec::standard_torus(2);
        let k = normalize_kernel(&KernelSpec::fat_tail(0.5), &t2).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let n = 24;
        let x = (0..2 * n).map(|_| rng.gen_range(0.0..TAU)).collect();
        let v: Vec<f64> = (0..2 * n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let ens = ParticleEnsemble::new(x, v.clone(), t2).unwrap();
        let out = simulate(&ens, &Dynamics::Alignment { kernel: k }, &SimConfig::new(1.0, 0.01, 5.0)).unwrap();
        let p0 = ens.momentum();
        let p1 = out.final_state.momentum();
        for (a, b) in p0.iter().zip(&p1) {
            assert!((a - b).abs() <= 1e-12 * 5.0 * n as f64);
        }
        for w in out.trace.delta_e.windows(2) {
            assert!(w[1] <= w[0] * (1.0 + 1e-12));
        }
        for c in 0..2 {
            let lo = v.iter().skip(c).step_by(2).copied().fold(f64::INFINITY, f64::min);
            let hi = v.iter().skip(c).step_by(2).copied().fold(f64::NEG_INFINITY, f64::max);
            for w in out.final_state.velocities().iter().skip(c).step_by(2) {
                assert!(*w >= lo - 1e-12 && *w <= hi + 1e-12);
            }
        }
        assert!(out.final_state.positions().iter().all(|&p| (0.0..TAU).contains(&p)));
    }

    #[test]
    fn repulsive_potential_trips_the_sentinel() {
        let f1 = DomainSpec::free(1).unwrap();
        let ens = ParticleEnsemble::new(vec![0.0, 1e-6], vec![0.0, 0.0], f1).unwrap();
        let mk =
            MatrixKernelSpec::scalar(KernelSpec::constant(0.0), Potential::Power { coefficient: -1e20, exponent: 1.0 });
        let err = simulate(&ens, &Dynamics::ThreeZone { kernel: mk }, &SimConfig::new(1.0, 0.1, 1.0)).unwrap_err();
        assert!(matches!(err, Error::ParticleBlowUp { .. }));
    }
}
