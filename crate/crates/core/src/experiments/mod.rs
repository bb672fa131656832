//! Configuration-driven scenario runner.
//!
//! A scenario produces named checks and text artifacts. [`run_scenario`]
//! writes the artifacts into a bundle directory together with
//! `manifest.json`, which records the config, each file's SHA-256 and a
//! digest over all of them. CSV output depends only on the config and seed.

mod initial;
mod scenarios;

use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

pub use initial::InitialData;
pub use scenarios::{evaluate, ScenarioOutcome};

use crate::error::{Error, Result};
use crate::geometry::{DomainSpec, KernelSpec};

/// Environment variable that overrides the root of relative output paths.
pub const OUTPUT_ROOT_ENV: &str = "ALIGNLAB_OUTPUT_ROOT";

/// Numeric overrides; unset fields take scenario defaults.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimParams {
    pub tau: Option<f64>,
    pub dt: Option<f64>,
    pub t_end: Option<f64>,
    pub agents: Option<usize>,
    pub cells: Option<usize>,
    pub k_max: Option<usize>,
    /// Velocity amplitude in units of `τ m₀ / |Ω|`.
    pub amplitude_factor: Option<f64>,
    pub record_every: Option<usize>,
    /// Hydro blow-up cap as a multiple of the initial gradient scale.
    pub blowup_factor: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub scenario: String,
    #[serde(default)]
    pub domain: Option<DomainSpec>,
    #[serde(default)]
    pub kernel: Option<KernelSpec>,
    #[serde(default)]
    pub initial: Option<InitialData>,
    #[serde(default)]
    pub sim: SimParams,
    #[serde(default)]
    pub outputs: Option<PathBuf>,
    #[serde(default)]
    pub seed: u64,
}

impl ExperimentConfig {
    pub fn named(scenario: &str) -> Self {
        Self {
            scenario: scenario.to_string(),
            domain: None,
            kernel: None,
            initial: None,
            sim: SimParams::default(),
            outputs: None,
            seed: 0,
        }
    }

    /// Parses JSON; any syntax or schema problem is a [`Error::Config`].
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    /// Bundle directory: `outputs` (or the scenario name) under the
    /// environment root when relative.
    pub fn output_dir(&self) -> PathBuf {
        let rel = self.outputs.clone().unwrap_or_else(|| PathBuf::from(&self.scenario));
        if rel.is_absolute() {
            return rel;
        }
        match std::env::var_os(OUTPUT_ROOT_ENV) {
            Some(root) => PathBuf::from(root).join(rel),
            None => rel,
        }
    }
}

/// Pass/fail thresholds used by scenarios and the acceptance suite.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    pub sigma_1d: f64,
    pub sigma_2d: f64,
    pub decay_exactness: f64,
    pub contraction: f64,
    pub invariant_drift: f64,
    pub threshold_fraction: f64,
    pub gap_uniform: f64,
    pub gap_ratio: f64,
    pub property: f64,
    pub certificate_epsilon: f64,
    pub blowup_refinement: f64,
    pub oscillator: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            sigma_1d: 1e-9,
            sigma_2d: 1e-8,
            decay_exactness: 1e-6,
            contraction: 1e-3,
            invariant_drift: 1e-6,
            threshold_fraction: 1e-2,
            gap_uniform: 1e-8,
            gap_ratio: 1e-6,
            property: 1e-10,
            certificate_epsilon: 1e-6,
            blowup_refinement: 1.5,
            oscillator: 1e-8,
        }
    }
}

impl Tolerances {
    /// Applies a `key=value` override.
    pub fn set(&mut self, assignment: &str) -> Result<()> {
        let (key, value) = assignment
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("expected key=value, got `{assignment}`")))?;
        let value: f64 = value.trim().parse().map_err(|_| Error::Config(format!("`{value}` is not a number")))?;
        let mut map = serde_json::to_value(&*self)?;
        let slot = map.get_mut(key.trim()).ok_or_else(|| Error::Config(format!("unknown tolerance `{key}`")))?;
        *slot = value.into();
        *self = serde_json::from_value(map)?;
        Ok(())
    }
}

/// One named comparison. `margin` is the slack, negative on failure.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub value: f64,
    pub limit: f64,
    pub margin: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl Check {
    pub fn at_most(name: &str, value: f64, limit: f64) -> Self {
        Self { name: name.into(), passed: value <= limit, value, limit, margin: limit - value, note: None }
    }

    pub fn at_least(name: &str, value: f64, limit: f64) -> Self {
        Self { name: name.into(), passed: value >= limit, value, limit, margin: value - limit, note: None }
    }

    pub fn flag(name: &str, ok: bool) -> Self {
        let v = if ok { 1.0 } else { 0.0 };
        Self { name: name.into(), passed: ok, value: v, limit: 1.0, margin: v - 1.0, note: None }
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.note = Some(note.into());
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScenarioInfo {
    pub name: &'static str,
    pub description: &'static str,
    pub topic: &'static str,
}

pub const SCENARIOS: &[ScenarioInfo] = &[
    ScenarioInfo {
        name: "sigma-1d-indicator",
        description: "Fourier gap of the unit-mass indicator of radius 1 on the 2π circle",
        topic: "σ_φ = 1 − sin 1",
    },
    ScenarioInfo {
        name: "sigma-2d-indicator",
        description: "Fourier gap of the unit-mass unit disc on the 2π torus against a Bessel quadrature",
        topic: "σ_φ = 1 − 2J₁(1)",
    },
    ScenarioInfo {
        name: "complete-graph-decay",
        description: "Alignment with a constant kernel; energy decays exactly like e^{−2τt}",
        topic: "spectral-gap decay of δE",
    },
    ScenarioInfo {
        name: "fat-tail-flocking",
        description: "Free-space 1D flock with a fat-tail kernel; velocity contraction and diameter bound",
        topic: "unconditional flocking, H-functional",
    },
    ScenarioInfo {
        name: "harmonic-potential-flock",
        description: "Three-zone dynamics with U = r²/2 against the damped-oscillator solution",
        topic: "anticipation dynamics",
    },
    ScenarioInfo {
        name: "hydro-1d-subcritical",
        description: "Euler-alignment on the circle below the critical threshold",
        topic: "1D threshold, u_x + τφ*ρ ≥ 0",
    },
    ScenarioInfo {
        name: "hydro-1d-supercritical",
        description: "Euler-alignment on the circle above the threshold; blow-up with mesh confirmation",
        topic: "1D threshold dichotomy",
    },
    ScenarioInfo {
        name: "hydro-2d-threshold",
        description: "2D Euler-alignment from data satisfying η ≥ ½ min ρ₀; threshold persistence",
        topic: "multi-D critical threshold",
    },
    ScenarioInfo {
        name: "weighted-gap-uniform",
        description: "Weighted Laplacian gap for uniform density against the Fourier symbol",
        topic: "λ₂(L_ρ) ≥ ½σ_φ c_ρ ρ₋",
    },
    ScenarioInfo {
        name: "weighted-gap-cosine",
        description: "Weighted Laplacian gap for a cosine density; bound and kinetic inequality",
        topic: "λ₂(L_ρ) ≥ ½σ_φ c_ρ ρ₋",
    },
];

pub fn list_scenarios() -> &'static [ScenarioInfo] {
    SCENARIOS
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FileEntry {
    pub name: String,
    pub sha256: String,
    pub bytes: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub scenario: String,
    pub config: ExperimentConfig,
    pub version: String,
    pub wall_time_s: f64,
    pub passed: bool,
    pub failures: Vec<String>,
    pub checks: Vec<Check>,
    pub files: Vec<FileEntry>,
    /// SHA-256 over the `name:sha256` lines of every emitted file.
    pub bundle_sha256: String,
}

#[derive(Debug, Clone)]
pub struct ResultBundle {
    pub dir: PathBuf,
    pub manifest: Manifest,
}

impl ResultBundle {
    pub fn passed(&self) -> bool {
        self.manifest.passed
    }
}

fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Runs a scenario and writes its bundle. Unknown scenarios and bad
/// configs are errors; numeric failures inside the scenario are recorded
/// in the manifest as failed checks.
pub fn run_scenario(config: &ExperimentConfig, tol: &Tolerances) -> Result<ResultBundle> {
    if !SCENARIOS.iter().any(|s| s.name == config.scenario) {
        return Err(Error::UnknownScenario(config.scenario.clone()));
    }
    let start = Instant::now();
    let outcome = match evaluate(config, tol) {
        Ok(o) => o,
        Err(e @ (Error::Config(_) | Error::UnknownScenario(_))) => return Err(e),
        Err(e) => ScenarioOutcome::failed(&e),
    };
    let dir = config.output_dir();
    std::fs::create_dir_all(&dir)?;
    let mut files = Vec::new();
    for (name, contents) in &outcome.artifacts {
        std::fs::write(dir.join(name), contents)?;
        files.push(FileEntry { name: name.clone(), sha256: sha256_hex(contents.as_bytes()), bytes: contents.len() });
    }
    let digest: String = files.iter().map(|f| format!("{}:{}\n", f.name, f.sha256)).collect();
    let failures: Vec<String> = outcome.checks.iter().filter(|c| !c.passed).map(|c| c.name.clone()).collect();
    let manifest = Manifest {
        scenario: config.scenario.clone(),
        config: config.clone(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        wall_time_s: start.elapsed().as_secs_f64(),
        passed: failures.is_empty() && !outcome.checks.is_empty(),
        failures,
        checks: outcome.checks,
        files,
        bundle_sha256: sha256_hex(digest.as_bytes()),
    };
    std::fs::write(dir.join("manifest.json"), serde_json::to_string_pretty(&manifest)?)?;
    Ok(ResultBundle { dir, manifest })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_round_trip_and_errors() {
        let text = r#"{"scenario": "sigma-1d-indicator", "sim": {"k_max": 32}, "seed": 4}"#;
        let cfg = ExperimentConfig::from_json(text).unwrap();
        assert_eq!(cfg.sim.k_max, Some(32));
        assert!(matches!(ExperimentConfig::from_json(""), Err(Error::Config(_))));
        assert!(matches!(ExperimentConfig::from_json(r#"{"scenario": "x", "bogus": 1}"#), Err(Error::Config(_))));
        let init =
            r#"{"scenario": "hydro-1d-subcritical", "initial": {"profile": "cosine-perturbation", "amplitude": 0.1}}"#;
        assert!(matches!(
            ExperimentConfig::from_json(init).unwrap().initial,
            Some(InitialData::CosinePerturbation { .. })
        ));
    }

    #[test]
    fn tolerance_overrides() {
        let mut t = Tolerances::default();
        t.set("sigma_1d=1e-3").unwrap();
        assert_eq!(t.sigma_1d, 1e-3);
        assert!(t.set("nope=1").is_err());
        assert!(t.set("sigma_1d").is_err());
        assert!(t.set("sigma_1d=abc").is_err());
    }

    #[test]
    fn unknown_scenario_is_rejected_before_writing() {
        let dir = tempfile::tempdir().unwrap();
        let mut cfg = ExperimentConfig::named("no-such-thing");
        cfg.outputs = Some(dir.path().join("out"));
        assert!(matches!(run_scenario(&cfg, &Tolerances::default()), Err(Error::UnknownScenario(_))));
        assert!(!dir.path().join("out").exists());
    }

    #[test]
    fn bundle_is_deterministic() {
        let dir = tempfile::tempdir().unwrap();
        let mut cfg = ExperimentConfig::named("complete-graph-decay");
        cfg.sim.t_end = Some(0.1);
        let mut hashes = Vec::new();
        for run in 0..2 {
            cfg.outputs = Some(dir.path().join(format!("run{run}")));
            let b = run_scenario(&cfg, &Tolerances::default()).unwrap();
            assert!(b.passed(), "{:?}", b.manifest.failures);
            assert!(b.dir.join("manifest.json").exists());
            hashes.push(b.manifest.bundle_sha256);
        }
        assert_eq!(hashes[0], hashes[1]);
    }

    #[test]
    fn catalog_contains_the_required_names() {
        for name in [
            "sigma-1d-indicator",
            "sigma-2d-indicator",
            "complete-graph-decay",
            "fat-tail-flocking",
            "hydro-1d-subcritical",
            "hydro-1d-supercritical",
            "hydro-2d-threshold",
            "weighted-gap-uniform",
            "harmonic-potential-flock",
        ] {
            assert!(list_scenarios().iter().any(|s| s.name == name), "{name}");
        }
    }
}
