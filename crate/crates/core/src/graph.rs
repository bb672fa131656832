//! Communication graphs, their Laplacians and Fiedler numbers.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{eval_topological, KernelSpec};
use crate::linalg::{second_smallest, DenseMatrix, EigenMethod};
use crate::particles::{EnergyTrace, ParticleEnsemble};

/// Symmetric non-negative weights with zero diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedGraph {
    weights: DenseMatrix,
}

impl WeightedGraph {
    /// Symmetrizes from the upper triangle and zeroes the diagonal.
    pub fn from_weights(w: &DenseMatrix) -> Result<Self> {
        let n = w.dim();
        let weights = DenseMatrix::from_fn(n, |i, j| match i.cmp(&j) {
            std::cmp::Ordering::Equal => 0.0,
            std::cmp::Ordering::Less => w.get(i, j),
            std::cmp::Ordering::Greater => w.get(j, i),
        });
        if let Some(bad) = weights.as_slice().iter().find(|v| !(**v >= 0.0)) {
            return Err(Error::InvalidParameter(format!("negative or NaN edge weight {bad}")));
        }
        Ok(Self { weights })
    }

    pub fn n(&self) -> usize {
        self.weights.dim()
    }

    pub fn weight(&self, i: usize, j: usize) -> f64 {
        self.weights.get(i, j)
    }

    pub fn weights(&self) -> &DenseMatrix {
        &self.weights
    }

    /// Number of connected components of the positive-weight edge set.
    pub fn components(&self) -> usize {
        let n = self.n();
        let mut uf = UnionFind::new(n);
        for i in 0..n {
            for j in i + 1..n {
                if self.weight(i, j) > 0.0 {
                    uf.union(i, j);
                }
            }
        }
        uf.count()
    }

    /// `⟨Δ_Φ v, v⟩` written as `½ Σ_i Σ_j φ_ij |v_i − v_j|²` for scalar `v`.
    pub fn dirichlet_energy(&self, v: &[f64]) -> f64 {
        let n = self.n();
        let mut s = 0.0;
        for i in 0..n {
            for j in 0..n {
                s += self.weight(i, j) * (v[i] - v[j]).powi(2);
            }
        }
        0.5 * s
    }
}

/// Disjoint-set forest with path halving and union by size.
#[derive(Debug, Clone)]
pub struct UnionFind {
    parent: Vec<usize>,
    size: Vec<usize>,
    count: usize,
}

impl UnionFind {
    pub fn new(n: usize) -> Self {
        Self { parent: (0..n).collect(), size: vec![1; n], count: n }
    }

    pub fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    pub fn union(&mut self, a: usize, b: usize) {
        let (mut a, mut b) = (self.find(a), self.find(b));
        if a == b {
            return;
        }
        if self.size[a] < self.size[b] {
            std::mem::swap(&mut a, &mut b);
        }
        self.parent[b] = a;
        self.size[a] += self.size[b];
        self.count -= 1;
    }

    pub fn count(&self) -> usize {
        self.count
    }
}

/// `Φ_ij = φ(x_i, x_j)` for `i ≠ j`.
pub fn adjacency(ens: &ParticleEnsemble, kernel: &KernelSpec) -> Result<WeightedGraph> {
    let n = ens.n();
    let domain = ens.domain();
    let mut w = DenseMatrix::zeros(n);
    for i in 0..n {
        for j in i + 1..n {
            let v = if kernel.is_topological() {
                eval_topological(kernel, ens.positions(), ens.position(i), ens.position(j), domain)?
            } else {
                kernel.radial(domain.distance(ens.position(i), ens.position(j)))
            };
            w.set(i, j, v);
            w.set(j, i, v);
        }
    }
    Ok(WeightedGraph { weights: w })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LaplacianScaling {
    /// `(1/N) Δ_Φ`; the complete unit graph has λ₂ = 1.
    #[default]
    PerAgent,
    Raw,
}

/// `Δ_Φ = diag(Σ_γ φ_αγ) − Φ`, optionally divided by `N`.
pub fn graph_laplacian(g: &WeightedGraph, scaling: LaplacianScaling) -> DenseMatrix {
    let n = g.n();
    let s = match scaling {
        LaplacianScaling::PerAgent => 1.0 / n.max(1) as f64,
        LaplacianScaling::Raw => 1.0,
    };
    let mut l = DenseMatrix::from_fn(n, |i, j| if i == j { 0.0 } else { -s * g.weight(i, j) });
    for i in 0..n {
        let deg: f64 = (0..n).filter(|&j| j != i).map(|j| s * g.weight(i, j)).sum();
        l.set(i, i, deg);
    }
    l
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralGapReport {
    pub lambda2: f64,
    pub fiedler_vector: Vec<f64>,
    pub connected: bool,
    pub residual: f64,
    /// λ₂ came out in `[−1e−10, 0)` and was set to zero.
    pub clamped: bool,
}

/// Connectivity threshold on λ₂ and the clamp window below zero.
pub const LAMBDA2_TOL: f64 = 1e-10;

/// Second-smallest eigenpair of a graph Laplacian (constant null vector).
pub fn fiedler(l: &DenseMatrix) -> Result<SpectralGapReport> {
    fiedler_with(l, &vec![1.0; l.dim()], EigenMethod::for_size(l.dim()))
}

/// As [`fiedler`] with an explicit null vector and solver.
pub fn fiedler_with(l: &DenseMatrix, null: &[f64], method: EigenMethod) -> Result<SpectralGapReport> {
    let pair = second_smallest(l, null, method)?;
    let tol = LAMBDA2_TOL * l.norm_inf().max(1.0);
    if pair.residual > tol {
        return Err(Error::EigenNoConvergence { iterations: 0, residual: pair.residual });
    }
    let mut lambda2 = pair.value;
    let mut clamped = false;
    if (-LAMBDA2_TOL..0.0).contains(&lambda2) {
        lambda2 = 0.0;
        clamped = true;
    }
    Ok(SpectralGapReport {
        lambda2,
        fiedler_vector: pair.vector,
        connected: lambda2 > LAMBDA2_TOL,
        residual: pair.residual,
        clamped,
    })
}

/// Outcome of checking `δE(t) ≤ exp(−2τ ∫₀ᵗ λ₂) δE(0) (1 + ε)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayCertificate {
    pub passed: bool,
    /// `max_t δE(t)/bound(t) − 1`; the run passes when this is `≤ ε`.
    pub worst_margin: f64,
    pub worst_time: f64,
    pub bound: Vec<f64>,
    pub epsilon: f64,
}

pub fn decay_certificate(trace: &EnergyTrace, tau: f64, epsilon: f64) -> Result<DecayCertificate> {
    let Some(lambda) = &trace.fiedler else {
        return Err(Error::MismatchedSeries("trace has no λ₂ samples".into()));
    };
    if lambda.len() != trace.times.len() || trace.delta_e.len() != trace.times.len() {
        return Err(Error::MismatchedSeries(format!(
            "{} times, {} δE samples, {} λ₂ samples",
            trace.times.len(),
            trace.delta_e.len(),
            lambda.len()
        )));
    }
    let e0 = trace.delta_e.first().copied().unwrap_or(0.0);
    let mut integral = 0.0;
    let mut bound = Vec::with_capacity(lambda.len());
    let mut worst = f64::NEG_INFINITY;
    let mut worst_time = 0.0;
    for k in 0..lambda.len() {
        if k > 0 {
            integral += 0.5 * (lambda[k] + lambda[k - 1]) * (trace.times[k] - trace.times[k - 1]);
        }
        let b = (-2.0 * tau * integral).exp() * e0;
        bound.push(b);
        if e0 > 0.0 {
            let m = trace.delta_e[k] / b - 1.0;
            if m > worst {
                worst = m;
                worst_time = trace.times[k];
            }
        }
    }
    if e0 == 0.0 {
        worst = 0.0;
    }
    Ok(DecayCertificate { passed: worst <= epsilon, worst_margin: worst, worst_time, bound, epsilon })
}
