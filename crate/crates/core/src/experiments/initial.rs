use std::path::PathBuf;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fourier::Grid;
use crate::geometry::DomainSpec;
use crate::hydro::FieldState;
use crate::particles::{load_ensemble_csv, ParticleEnsemble};

/// Named initial data. Field profiles use `x` in grid coordinates; particle
/// profiles draw from a ChaCha8 stream seeded by the experiment seed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "profile", rename_all = "kebab-case", deny_unknown_fields)]
pub enum InitialData {
    /// Constant density and velocity.
    Uniform {
        #[serde(default = "one")]
        density: f64,
        #[serde(default)]
        velocity: Vec<f64>,
    },
    /// `ρ = density (1 + amplitude Π cos x_k)`, `u_k = velocity_amplitude sin x_k`.
    CosinePerturbation {
        #[serde(default = "one")]
        density: f64,
        #[serde(default)]
        amplitude: f64,
        #[serde(default)]
        velocity_amplitude: f64,
    },
    /// Periodized Gaussian on a background, centred in the cell `[0, L)^d`.
    GaussianBump {
        #[serde(default = "one")]
        background: f64,
        amplitude: f64,
        width: f64,
        #[serde(default)]
        velocity_amplitude: f64,
    },
    /// Two groups moving apart along the first axis.
    TwoCluster {
        separation: f64,
        #[serde(default = "tenth")]
        spread: f64,
        #[serde(default)]
        speed: f64,
    },
    /// Independent uniform positions and velocity components.
    Random { position_range: (f64, f64), velocity_range: (f64, f64) },
    /// Particle CSV with columns `x_1..x_d, v_1..v_d`.
    File { path: PathBuf },
}

fn one() -> f64 {
    1.0
}

fn tenth() -> f64 {
    0.1
}

impl InitialData {
    pub fn particles(&self, n: usize, domain: DomainSpec, seed: u64) -> Result<ParticleEnsemble> {
        let d = domain.dim;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (x, v) = match self {
            InitialData::Random { position_range: (xa, xb), velocity_range: (va, vb) } => {
                if !(xa < xb && va <= vb) {
                    return Err(Error::Config("empty sampling range".into()));
                }
                let x: Vec<f64> = (0..n * d).map(|_| rng.gen_range(*xa..*xb)).collect();
                let v: Vec<f64> = (0..n * d).map(|_| if va == vb { *va } else { rng.gen_range(*va..*vb) }).collect();
                (x, v)
            }
            InitialData::TwoCluster { separation, spread, speed } => {
                let mut x = Vec::with_capacity(n * d);
                let mut v = Vec::with_capacity(n * d);
                for i in 0..n {
                    let side = if i % 2 == 0 { -0.5 } else { 0.5 };
                    for k in 0..d {
                        let jitter = spread * rng.gen_range(-1.0..1.0);
                        let base = if k == 0 { side * separation } else { 0.0 };
                        x.push(base + jitter);
                        v.push(if k == 0 { 2.0 * side * speed } else { 0.0 } + 0.1 * spread * rng.gen_range(-1.0..1.0));
                    }
                }
                (x, v)
            }
            InitialData::Uniform { velocity, .. } => {
                let vel = pad(velocity, d);
                let x: Vec<f64> = (0..n * d).map(|_| rng.gen_range(-1.0..1.0)).collect();
                let v = (0..n).flat_map(|_| vel.iter().copied()).collect();
                (x, v)
            }
            InitialData::File { path } => {
                let ens = load_ensemble_csv(path, domain)?;
                if ens.n() != n && n != 0 {
                    return Err(Error::Config(format!("{} holds {} agents, expected {n}", path.display(), ens.n())));
                }
                return Ok(ens);
            }
            other => return Err(Error::Config(format!("{} is a field profile, not particle data", other.name()))),
        };
        let mut x = x;
        if domain.is_torus() {
            x.chunks_mut(d).for_each(|p| domain.wrap(p));
        }
        ParticleEnsemble::new(x, v, domain)
    }

    pub fn field(&self, grid: Grid) -> Result<FieldState> {
        let d = grid.dim();
        let l = grid.period();
        match self {
            InitialData::Uniform { density, velocity } => {
                let vel = pad(velocity, d);
                FieldState::from_fn(grid, |_| *density, |_| vel.clone())
            }
            InitialData::CosinePerturbation { density, amplitude, velocity_amplitude } => {
                let w = std::f64::consts::TAU / l;
                FieldState::from_fn(
                    grid,
                    |x| density * (1.0 + amplitude * x.iter().map(|c| (w * c).cos()).product::<f64>()),
                    |x| x.iter().map(|c| velocity_amplitude * (w * c).sin()).collect(),
                )
            }
            InitialData::GaussianBump { background, amplitude, width, velocity_amplitude } => {
                let w = std::f64::consts::TAU / l;
                FieldState::from_fn(
                    grid,
                    |x| {
                        let r2: f64 = x
                            .iter()
                            .map(|c| {
                                let z = c - 0.5 * l;
                                z * z
                            })
                            .sum();
                        background + amplitude * (-0.5 * r2 / (width * width)).exp()
                    },
                    |x| x.iter().map(|c| velocity_amplitude * (w * c).sin()).collect(),
                )
            }
            InitialData::TwoCluster { separation, spread, speed } => {
                let c = 0.5 * l;
                FieldState::from_fn(
                    grid,
                    |x| {
                        let bump = |s: f64| {
                            let r2: f64 = x
                                .iter()
                                .enumerate()
                                .map(|(k, v)| {
                                    let z = v - c - if k == 0 { s * separation } else { 0.0 };
                                    z * z
                                })
                                .sum();
                            (-0.5 * r2 / (spread * spread)).exp()
                        };
                        1e-3 + bump(-0.5) + bump(0.5)
                    },
                    |x| {
                        (0..d)
                            .map(|k| {
                                if k == 0 {
                                    if x[0] < c {
                                        -speed
                                    } else {
                                        *speed
                                    }
                                } else {
                                    0.0
                                }
                            })
                            .collect()
                    },
                )
            }
            other => Err(Error::Config(format!("{} is particle data, not a field profile", other.name()))),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            InitialData::Uniform { .. } => "uniform",
            InitialData::CosinePerturbation { .. } => "cosine-perturbation",
            InitialData::GaussianBump { .. } => "gaussian-bump",
            InitialData::TwoCluster { .. } => "two-cluster",
            InitialData::Random { .. } => "random",
            InitialData::File { .. } => "file",
        }
    }
}

fn pad(v: &[f64], d: usize) -> Vec<f64> {
    (0..d).map(|k| v.get(k).copied().unwrap_or(0.0)).collect()
}
