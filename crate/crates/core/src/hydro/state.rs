use crate::error::{Error, Result};
use crate::fourier::Grid;

/// Density and momentum on a periodic grid. Velocities are derived,
/// `u = (ρu)/ρ`, and set to zero in vacuum cells.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldState {
    pub grid: Grid,
    pub rho: Vec<f64>,
    /// Momentum components `ρ u_b`, one vector per axis.
    pub momentum: Vec<Vec<f64>>,
    pub time: f64,
}

/// Cells lighter than this fraction of the mean density count as vacuum.
pub const VACUUM_FRACTION: f64 = 1e-14;

impl FieldState {
    /// Builds a state from density and velocity components.
    pub fn new(grid: Grid, rho: Vec<f64>, u: Vec<Vec<f64>>) -> Result<Self> {
        let m = grid.len();
        if rho.len() != m {
            return Err(Error::DimensionMismatch { expected: m, found: rho.len() });
        }
        if u.len() != grid.dim() {
            return Err(Error::DimensionMismatch { expected: grid.dim(), found: u.len() });
        }
        if let Some(c) = u.iter().find(|c| c.len() != m) {
            return Err(Error::DimensionMismatch { expected: m, found: c.len() });
        }
        if rho.iter().any(|r| !(*r >= 0.0)) {
            return Err(Error::InvalidParameter("density must be non-negative".into()));
        }
        let momentum = u.iter().map(|c| c.iter().zip(&rho).map(|(v, r)| v * r).collect()).collect();
        let s = Self { grid, rho, momentum, time: 0.0 };
        if !(s.mass() > 0.0) {
            return Err(Error::ZeroMass);
        }
        Ok(s)
    }

    /// Samples `ρ₀(x)` and `u₀(x)` at cell centres.
    pub fn from_fn<R, U>(grid: Grid, rho: R, u: U) -> Result<Self>
    where
        R: Fn(&[f64]) -> f64,
        U: Fn(&[f64]) -> Vec<f64>,
    {
        let r = grid.sample(&rho);
        let d = grid.dim();
        let mut comps = vec![Vec::with_capacity(grid.len()); d];
        for i in 0..grid.len() {
            let v = u(&grid.point(i));
            for (c, vi) in comps.iter_mut().zip(v) {
                c.push(vi);
            }
        }
        Self::new(grid, r, comps)
    }

    pub fn dim(&self) -> usize {
        self.grid.dim()
    }

    /// `m₀ = ∫ ρ`.
    pub fn mass(&self) -> f64 {
        self.grid.integrate(&self.rho)
    }

    /// `∫ ρ u`.
    pub fn total_momentum(&self) -> Vec<f64> {
        self.momentum.iter().map(|c| self.grid.integrate(c)).collect()
    }

    pub(crate) fn vacuum_threshold(&self) -> f64 {
        VACUUM_FRACTION * self.mass() / self.grid.domain.volume().expect("torus")
    }

    /// Velocity components with the vacuum guard applied.
    pub fn velocity(&self) -> Vec<Vec<f64>> {
        let floor = self.vacuum_threshold();
        self.momentum
            .iter()
            .map(|c| c.iter().zip(&self.rho).map(|(m, r)| if *r < floor { 0.0 } else { m / r }).collect())
            .collect()
    }

    pub fn rho_min(&self) -> f64 {
        self.rho.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn rho_max(&self) -> f64 {
        self.rho.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn is_finite(&self) -> bool {
        self.rho.iter().chain(self.momentum.iter().flatten()).all(|v| v.is_finite())
    }
}
