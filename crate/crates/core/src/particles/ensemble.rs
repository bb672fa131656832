use crate::error::{Error, Result};
use crate::geometry::DomainSpec;

/// Positions and velocities of `N` agents, stored row-major as `N×d`.
#[derive(Debug, Clone, PartialEq)]
pub struct ParticleEnsemble {
    positions: Vec<f64>,
    velocities: Vec<f64>,
    domain: DomainSpec,
}

impl ParticleEnsemble {
    /// Builds an ensemble, wrapping torus positions into the fundamental cell.
    pub fn new(mut positions: Vec<f64>, velocities: Vec<f64>, domain: DomainSpec) -> Result<Self> {
        domain.validate()?;
        let d = domain.dim;
        if positions.is_empty() {
            return Err(Error::EmptyEnsemble);
        }
        if !positions.len().is_multiple_of(d) {
            return Err(Error::DimensionMismatch { expected: d, found: positions.len() % d });
        }
        if velocities.len() != positions.len() {
            return Err(Error::DimensionMismatch { expected: positions.len(), found: velocities.len() });
        }
        positions.chunks_exact_mut(d).for_each(|x| domain.wrap(x));
        Ok(Self { positions, velocities, domain })
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.positions.len() / self.domain.dim
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.domain.dim
    }

    pub fn domain(&self) -> &DomainSpec {
        &self.domain
    }

    #[inline]
    pub fn position(&self, i: usize) -> &[f64] {
        let d = self.dim();
        &self.positions[i * d..(i + 1) * d]
    }

    #[inline]
    pub fn velocity(&self, i: usize) -> &[f64] {
        let d = self.dim();
        &self.velocities[i * d..(i + 1) * d]
    }

    pub fn positions(&self) -> &[f64] {
        &self.positions
    }

    pub fn velocities(&self) -> &[f64] {
        &self.velocities
    }

    /// Replaces the state; positions are wrapped on the torus.
    pub(crate) fn set_state(&mut self, positions: &[f64], velocities: &[f64]) {
        self.positions.copy_from_slice(positions);
        self.velocities.copy_from_slice(velocities);
        let d = self.dim();
        let domain = self.domain;
        self.positions.chunks_exact_mut(d).for_each(|x| domain.wrap(x));
    }

    /// `Σ_i v_i`.
    pub fn momentum(&self) -> Vec<f64> {
        let d = self.dim();
        let mut m = vec![0.0; d];
        for v in self.velocities.chunks_exact(d) {
            m.iter_mut().zip(v).for_each(|(a, b)| *a += b);
        }
        m
    }

    pub fn mean_velocity(&self) -> Vec<f64> {
        let n = self.n() as f64;
        self.momentum().into_iter().map(|m| m / n).collect()
    }
}
