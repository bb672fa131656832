use rustfft::num_complex::Complex;
use serde::{Deserialize, Serialize};

use super::grid::{fft_nd, Grid, GridKernel};

/// Both sides of `∬ φ(|x−x′|) |w−w′|² ≥ (σ/|Ω|) ∬ |w−w′|²` on the grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PoincareReport {
    pub lhs: f64,
    pub rhs: f64,
    /// `lhs − rhs`.
    pub margin: f64,
    pub sigma: f64,
}

/// `h^{2d} Σ_a Σ_b |w_a − w_b|²`, the discrete `∬ |w − w′|²`.
pub fn pair_energy(grid: &Grid, w: &[f64]) -> f64 {
    let mut s = 0.0;
    for a in w {
        for b in w {
            s += (a - b) * (a - b);
        }
    }
    s * grid.cell_volume().powi(2)
}

/// The same quantity from Fourier coefficients `c_k = ŵ_k / M`:
/// `2 |Ω|² Σ_{k≠0} |c_k|²`.
pub fn pair_energy_spectral(grid: &Grid, w: &[f64]) -> f64 {
    let mut buf: Vec<Complex<f64>> = w.iter().map(|&v| Complex::new(v, 0.0)).collect();
    fft_nd(&mut buf, grid.n, grid.dim(), false);
    let m = grid.len() as f64;
    let omega = grid.domain.volume().expect("torus");
    2.0 * omega * omega * buf.iter().skip(1).map(|c| c.norm_sqr() / (m * m)).sum::<f64>()
}

/// Checks the discrete Poincaré inequality with the grid gap `σ_h`, for
/// which it holds exactly: the weighted pair sum is diagonal in Fourier
/// space with symbol `1 − κ̂(k) ≥ σ_h` on every non-zero mode.
pub fn poincare_check(gk: &GridKernel, w: &[f64]) -> PoincareReport {
    poincare_check_with_sigma(gk, w, gk.sigma().0)
}

/// As [`poincare_check`] with a caller-supplied constant.
pub fn poincare_check_with_sigma(gk: &GridKernel, w: &[f64], sigma: f64) -> PoincareReport {
    let grid = gk.grid();
    let m = grid.len();
    let mut lhs = 0.0;
    for a in 0..m {
        for b in 0..m {
            lhs += gk.pair_weight(a, b) * (w[a] - w[b]).powi(2);
        }
    }
    // κ = φ h^d, so φ h^{2d} = κ h^d
    lhs *= grid.cell_volume();
    let omega = grid.domain.volume().expect("torus");
    let rhs = sigma / omega * pair_energy(grid, w);
    PoincareReport { lhs, rhs, margin: lhs - rhs, sigma }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{normalize_kernel, DomainSpec, KernelFamily, KernelSpec};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::TAU;

    fn band_limited(grid: &Grid, band: i64, rng: &mut ChaCha8Rng) -> Vec<f64> {
        let d = grid.dim();
        let side = (2 * band + 1) as usize;
        let terms: Vec<(Vec<f64>, f64, f64)> = (0..side.pow(d as u32))
            .map(|mut c| {
                let k: Vec<f64> = (0..d)
                    .map(|_| {
                        let v = (c % side) as i64 - band;
                        c /= side;
                        v as f64
                    })
                    .collect();
                (k, rng.gen_range(-1.0..1.0), rng.gen_range(0.0..TAU))
            })
            .collect();
        let l = grid.period();
        grid.sample(|x| {
            terms
                .iter()
                .map(|(k, a, p)| a * (TAU / l * k.iter().zip(x).map(|(ki, xi)| ki * xi).sum::<f64>() + p).cos())
                .sum()
        })
    }

    #[test]
    fn constant_field_has_zero_margin() {
        let dom = DomainSpec::standard_torus(1);
        let g = Grid::new(dom, 32).unwrap();
        let k = normalize_kernel(&KernelSpec::indicator(1.0), &dom).unwrap();
        let gk = GridKernel::new(&k, &g).unwrap();
        let r = poincare_check(&gk, &[2.5; 32]);
        assert_eq!((r.lhs, r.rhs, r.margin), (0.0, 0.0, 0.0));
    }

    #[test]
    fn extremal_mode_has_near_zero_margin() {
        let dom = DomainSpec::standard_torus(1);
        let g = Grid::new(dom, 64).unwrap();
        let k = normalize_kernel(&KernelSpec::indicator(1.0), &dom).unwrap();
        let gk = GridKernel::new(&k, &g).unwrap();
        let (_, mode) = gk.sigma();
        let w = g.sample(|x| (mode[0] as f64 * x[0]).cos());
        let r = poincare_check(&gk, &w);
        assert!(r.margin.abs() < 1e-10 * r.lhs, "{r:?}");
    }

    #[test]
    fn random_band_limited_fields_satisfy_the_inequality() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for (d, n, fam) in [
            (1, 64, KernelFamily::Indicator { radius: 1.0 }),
            (1, 64, KernelFamily::FatTail { theta: 0.5 }),
            (2, 16, KernelFamily::Indicator { radius: 1.0 }),
            (2, 16, KernelFamily::IncreasingCompact { radius: 2.0 }),
        ] {
            let dom = DomainSpec::standard_torus(d);
            let g = Grid::new(dom, n).unwrap();
            let k = normalize_kernel(&KernelSpec::new(fam), &dom).unwrap();
            let gk = GridKernel::new(&k, &g).unwrap();
            for _ in 0..100 {
                let w = band_limited(&g, 4, &mut rng);
                assert!(poincare_check(&gk, &w).margin >= -1e-10);
            }
        }
    }

    #[test]
    fn parseval_consistency() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for (d, n) in [(1, 64), (2, 16)] {
            let g = Grid::new(DomainSpec::standard_torus(d), n).unwrap();
            let w = band_limited(&g, 5, &mut rng);
            let direct = pair_energy(&g, &w);
            let spectral = pair_energy_spectral(&g, &w);
            assert!((direct - spectral).abs() <= 1e-10 * direct, "{direct} vs {spectral}");
        }
    }
}
