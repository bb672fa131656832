use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Ambient space of positions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum DomainKind {
    /// Flat torus `[0, period)^dim` with the minimum-image metric.
    Torus { period: f64 },
    /// Free space `R^dim` with the Euclidean metric.
    Free,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DomainSpec {
    #[serde(flatten)]
    pub kind: DomainKind,
    pub dim: usize,
}

impl DomainSpec {
    pub fn torus(dim: usize, period: f64) -> Result<Self> {
        let d = Self { kind: DomainKind::Torus { period }, dim };
        d.validate()?;
        Ok(d)
    }

    pub fn free(dim: usize) -> Result<Self> {
        let d = Self { kind: DomainKind::Free, dim };
        d.validate()?;
        Ok(d)
    }

    /// The 2π-periodic torus used throughout the examples.
    pub fn standard_torus(dim: usize) -> Self {
        Self { kind: DomainKind::Torus { period: std::f64::consts::TAU }, dim }
    }

    pub fn validate(&self) -> Result<()> {
        if !(1..=3).contains(&self.dim) {
            return Err(Error::InvalidDomain(format!("dimension {} not in 1..=3", self.dim)));
        }
        if let DomainKind::Torus { period } = self.kind {
            if !(period.is_finite() && period > 0.0) {
                return Err(Error::InvalidDomain(format!("period must be positive, got {period}")));
            }
        }
        Ok(())
    }

    pub fn period(&self) -> Option<f64> {
        match self.kind {
            DomainKind::Torus { period } => Some(period),
            DomainKind::Free => None,
        }
    }

    pub fn is_torus(&self) -> bool {
        matches!(self.kind, DomainKind::Torus { .. })
    }

    /// Lebesgue measure of the fundamental cell; `None` on free space.
    pub fn volume(&self) -> Option<f64> {
        self.period().map(|l| l.powi(self.dim as i32))
    }

    pub fn check_point(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, found: x.len() });
        }
        Ok(())
    }

    /// Writes the displacement from `x` to `y` into `out`, reduced to the
    /// minimum image on the torus. Exactly antisymmetric in `(x, y)`.
    #[inline]
    pub fn displacement(&self, x: &[f64], y: &[f64], out: &mut [f64]) {
        match self.kind {
            DomainKind::Free => {
                for ((o, a), b) in out.iter_mut().zip(x).zip(y) {
                    *o = b - a;
                }
            }
            DomainKind::Torus { period } => {
                for ((o, a), b) in out.iter_mut().zip(x).zip(y) {
                    let dx = b - a;
                    *o = dx - period * (dx / period).round();
                }
            }
        }
    }

    /// Unchecked distance; callers guarantee matching dimensions.
    #[inline]
    pub fn distance(&self, x: &[f64], y: &[f64]) -> f64 {
        let mut sq = 0.0;
        match self.kind {
            DomainKind::Free => {
                for (a, b) in x.iter().zip(y) {
                    let dx = b - a;
                    sq += dx * dx;
                }
            }
            DomainKind::Torus { period } => {
                for (a, b) in x.iter().zip(y) {
                    let dx = b - a;
                    let dx = dx - period * (dx / period).round();
                    sq += dx * dx;
                }
            }
        }
        sq.sqrt()
    }

    /// Reduces a point to the fundamental cell (no-op on free space).
    pub fn wrap(&self, x: &mut [f64]) {
        if let DomainKind::Torus { period } = self.kind {
            for c in x.iter_mut() {
                let mut r = c.rem_euclid(period);
                if r >= period {
                    r -= period;
                }
                *c = r;
            }
        }
    }

    /// Largest possible distance between two points (torus only).
    pub fn max_distance(&self) -> Option<f64> {
        self.period().map(|l| 0.5 * l * (self.dim as f64).sqrt())
    }
}

/// Distance between `x` and `x2` in the domain metric: Euclidean on free
/// space, minimum image on the torus.
pub fn periodic_distance(x: &[f64], x2: &[f64], domain: &DomainSpec) -> Result<f64> {
    domain.check_point(x)?;
    domain.check_point(x2)?;
    Ok(domain.distance(x, x2))
}
