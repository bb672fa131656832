use super::ParticleEnsemble;
use crate::quad::CompensatedSum;

/// `δE = (1/N²) Σ_i Σ_j |v_i − v_j|²`, evaluated as `(2/N) Σ_i |v_i − v̄|²`.
pub fn energy_fluctuation(ens: &ParticleEnsemble) -> f64 {
    let vbar = ens.mean_velocity();
    let mut s = CompensatedSum::default();
    for v in ens.velocities().chunks_exact(ens.dim()) {
        s.add(v.iter().zip(&vbar).map(|(a, b)| (a - b) * (a - b)).sum());
    }
    2.0 * s.value() / ens.n() as f64
}

/// `(D, V)`: largest pairwise position distance in the domain metric and
/// largest pairwise velocity distance.
pub fn flock_diameter(ens: &ParticleEnsemble) -> (f64, f64) {
    let n = ens.n();
    let domain = ens.domain();
    let mut dmax: f64 = 0.0;
    let mut vmax: f64 = 0.0;
    for i in 0..n {
        for j in i + 1..n {
            dmax = dmax.max(domain.distance(ens.position(i), ens.position(j)));
            let dv: f64 = ens.velocity(i).iter().zip(ens.velocity(j)).map(|(a, b)| (a - b) * (a - b)).sum();
            vmax = vmax.max(dv.sqrt());
        }
    }
    (dmax, vmax)
}

/// Per-component velocity spreads `V_k = max_i v_ik − min_i v_ik`.
pub fn component_velocity_diameters(ens: &ParticleEnsemble) -> Vec<f64> {
    let d = ens.dim();
    (0..d)
        .map(|k| {
            let (lo, hi) = ens
                .velocities()
                .iter()
                .skip(k)
                .step_by(d)
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
            hi - lo
        })
        .collect()
}

/// `H = τc ⟨D⟩^{1−θ} + (1−θ) √d max_k V_k` for a kernel bounded below by
/// `c ⟨r⟩^{−θ}`. Non-increasing along the dynamics.
pub fn h_functional(d_pos: f64, v_components: &[f64], tau_c: f64, theta: f64) -> f64 {
    let vmax = v_components.iter().copied().fold(0.0, f64::max);
    let dim = v_components.len() as f64;
    tau_c * (1.0 + d_pos * d_pos).sqrt().powf(1.0 - theta) + (1.0 - theta) * dim.sqrt() * vmax
}

/// `D₊` solving `τc ⟨D₊⟩^{1−θ} = H₀`: the diameter can never exceed it.
pub fn diameter_bound(h0: f64, tau_c: f64, theta: f64) -> f64 {
    let bracket = (h0 / tau_c).powf(1.0 / (1.0 - theta));
    (bracket * bracket - 1.0).max(0.0).sqrt()
}
