use std::collections::HashMap;

use rustfft::num_complex::Complex;
use rustfft::FftPlanner;

use super::coefficients::kernel_fourier_coefficient;
use crate::error::{Error, Result};
use crate::geometry::{DomainSpec, KernelSpec};
use crate::quad::Composite;

/// Uniform periodic grid of `n` cells per axis on a torus, with nodes at
/// cell centres `(a + ½) h`. Flat index runs fastest along axis 0.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    pub domain: DomainSpec,
    pub n: usize,
}

impl Grid {
    pub fn new(domain: DomainSpec, n: usize) -> Result<Self> {
        domain.validate()?;
        if !domain.is_torus() {
            return Err(Error::NotTorus);
        }
        if n < 2 {
            return Err(Error::InvalidParameter(format!("grid needs at least 2 cells per axis, got {n}")));
        }
        Ok(Self { domain, n })
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.domain.dim
    }

    #[inline]
    pub fn period(&self) -> f64 {
        self.domain.period().expect("grid domains are tori")
    }

    #[inline]
    pub fn h(&self) -> f64 {
        self.period() / self.n as f64
    }

    /// `h^d`.
    #[inline]
    pub fn cell_volume(&self) -> f64 {
        self.h().powi(self.dim() as i32)
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.n.pow(self.dim() as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Multi-index of flat index `idx`.
    pub fn multi_index(&self, mut idx: usize) -> [usize; 3] {
        let mut m = [0; 3];
        for c in m.iter_mut().take(self.dim()) {
            *c = idx % self.n;
            idx /= self.n;
        }
        m
    }

    pub fn flat_index(&self, m: &[usize]) -> usize {
        m.iter().rev().fold(0, |acc, &c| acc * self.n + c)
    }

    /// Cell-centre coordinates of node `idx`.
    pub fn point(&self, idx: usize) -> Vec<f64> {
        let h = self.h();
        self.multi_index(idx)[..self.dim()].iter().map(|&a| (a as f64 + 0.5) * h).collect()
    }

    /// Flat index of the neighbour shifted by `shift` along `axis`.
    #[inline]
    pub fn shifted(&self, idx: usize, axis: usize, shift: isize) -> usize {
        let stride = self.n.pow(axis as u32);
        let a = (idx / stride) % self.n;
        let b = (a as isize + shift).rem_euclid(self.n as isize) as usize;
        idx - a * stride + b * stride
    }

    /// Signed integer mode (or displacement) of index component `a`, in
    /// `(−n/2, n/2]`.
    #[inline]
    pub fn signed(&self, a: usize) -> i64 {
        let a = a as i64;
        let n = self.n as i64;
        if a > n / 2 {
            a - n
        } else {
            a
        }
    }

    pub fn sample<F: Fn(&[f64]) -> f64>(&self, f: F) -> Vec<f64> {
        (0..self.len()).map(|i| f(&self.point(i))).collect()
    }

    /// `h^d Σ f`.
    pub fn integrate(&self, f: &[f64]) -> f64 {
        self.cell_volume() * f.iter().sum::<f64>()
    }
}

/// In-place d-dimensional FFT, axis by axis.
pub(crate) fn fft_nd(data: &mut [Complex<f64>], n: usize, dim: usize, inverse: bool) {
    let mut planner = FftPlanner::new();
    let fft = if inverse { planner.plan_fft_inverse(n) } else { planner.plan_fft_forward(n) };
    let mut line = vec![Complex::default(); n];
    let total = data.len();
    for axis in 0..dim {
        let stride = n.pow(axis as u32);
        for start in 0..total {
            if !(start / stride).is_multiple_of(n) {
                continue;
            }
            for (k, l) in line.iter_mut().enumerate() {
                *l = data[start + k * stride];
            }
            fft.process(&mut line);
            for (k, l) in line.iter().enumerate() {
                data[start + k * stride] = *l;
            }
        }
    }
    if inverse {
        let s = 1.0 / total as f64;
        data.iter_mut().for_each(|c| *c *= s);
    }
}

/// Discrete convolution weights `κ_j ≈ ∫_{cell j} φ(|z|) dz` on a grid,
/// indexed by displacement, renormalized to `Σ κ_j = 1`.
///
/// Cell averages are exact (piecewise Gauss–Legendre) in one dimension and
/// use `s^d` midpoint sub-samples in higher dimensions. Because the
/// weights are symmetric, their DFT `κ̂` is real, and the discrete
/// operator `f ↦ Σ_b κ_{a−b} f_b` is diagonal with eigenvalues `κ̂(k)`.
/// [`GridKernel::spectral`] builds the alternative with the continuum symbol.
#[derive(Debug, Clone)]
pub struct GridKernel {
    grid: Grid,
    weights: Vec<f64>,
    spectrum: Vec<f64>,
    raw_mass: f64,
}

pub const DEFAULT_SUBSAMPLES: usize = 8;

impl GridKernel {
    pub fn new(kernel: &KernelSpec, grid: &Grid) -> Result<Self> {
        Self::with_subsamples(kernel, grid, DEFAULT_SUBSAMPLES)
    }

    pub fn with_subsamples(kernel: &KernelSpec, grid: &Grid, subsamples: usize) -> Result<Self> {
        kernel.family.validate()?;
        let d = grid.dim();
        let h = grid.h();
        let l = grid.period();
        let min_image = |t: f64| t - l * (t / l).round();
        let mut weights = vec![0.0; grid.len()];
        if d == 1 {
            let mut breaks = vec![0.0, 0.5 * l, -0.5 * l];
            for r in kernel.family.breakpoints() {
                breaks.extend([r, -r, l - r, r - l]);
            }
            let q = Composite::new(10, 2);
            for (j, w) in weights.iter_mut().enumerate() {
                let z = grid.signed(j) as f64 * h;
                *w = q.integrate(z - 0.5 * h, z + 0.5 * h, &breaks, |t| kernel.radial(min_image(t).abs()));
            }
        } else {
            let s = subsamples.max(1);
            let offsets: Vec<f64> = (0..s).map(|k| ((k as f64 + 0.5) / s as f64 - 0.5) * h).collect();
            let sub = s.pow(d as u32);
            let vol = grid.cell_volume() / sub as f64;
            let mut p = vec![0.0; d];
            for (j, w) in weights.iter_mut().enumerate() {
                let m = grid.multi_index(j);
                let centre: Vec<f64> = m[..d].iter().map(|&a| grid.signed(a) as f64 * h).collect();
                let mut acc = 0.0;
                for code in 0..sub {
                    let mut c = code;
                    for (axis, pi) in p.iter_mut().enumerate() {
                        *pi = min_image(centre[axis] + offsets[c % s]);
                        c /= s;
                    }
                    acc += kernel.radial(p.iter().map(|v| v * v).sum::<f64>().sqrt());
                }
                *w = acc * vol;
            }
        }
        // exact evenness κ_j = κ_{−j}, so the spectrum is real
        let mirrored: Vec<f64> = (0..grid.len())
            .map(|j| {
                let m = grid.multi_index(j);
                let neg: Vec<usize> = m[..d].iter().map(|&a| (grid.n - a) % grid.n).collect();
                weights[grid.flat_index(&neg)]
            })
            .collect();
        weights.iter_mut().zip(&mirrored).for_each(|(w, m)| *w = 0.5 * (*w + m));
        let raw_mass: f64 = weights.iter().sum();
        if !(raw_mass > 0.0) {
            return Err(Error::ZeroMass);
        }
        weights.iter_mut().for_each(|w| *w /= raw_mass);
        let mut buf: Vec<Complex<f64>> = weights.iter().map(|&w| Complex::new(w, 0.0)).collect();
        fft_nd(&mut buf, grid.n, d, false);
        let spectrum = buf.iter().map(|c| c.re).collect();
        Ok(Self { grid: *grid, weights, spectrum, raw_mass })
    }

    /// Weights whose discrete symbol equals the continuum Fourier
    /// coefficients on every resolved mode, `κ̂(k) = ∫ φ cos(k·x)` for
    /// `|k_i| ≤ n/2`, normalized by the zero mode. Weights may be negative.
    pub fn spectral(kernel: &KernelSpec, grid: &Grid) -> Result<Self> {
        kernel.family.validate()?;
        let d = grid.dim();
        let mut memo: HashMap<Vec<i64>, f64> = HashMap::new();
        let mut spectrum = Vec::with_capacity(grid.len());
        for j in 0..grid.len() {
            let m = grid.multi_index(j);
            let mut key: Vec<i64> = m[..d].iter().map(|&a| grid.signed(a).abs()).collect();
            key.sort_unstable();
            let v = match memo.get(&key) {
                Some(v) => *v,
                None => {
                    let v = kernel_fourier_coefficient(kernel, &key, &grid.domain)?;
                    memo.insert(key, v);
                    v
                }
            };
            spectrum.push(v);
        }
        let raw_mass = spectrum[0];
        if !(raw_mass > 0.0) {
            return Err(Error::ZeroMass);
        }
        spectrum.iter_mut().for_each(|v| *v /= raw_mass);
        let mut buf: Vec<Complex<f64>> = spectrum.iter().map(|&v| Complex::new(v, 0.0)).collect();
        fft_nd(&mut buf, grid.n, d, true);
        let weights = buf.iter().map(|c| c.re).collect();
        Ok(Self { grid: *grid, weights, spectrum, raw_mass })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    /// `κ_j`, summing to one.
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// `κ̂(k) = Σ_j κ_j cos(2π k·j / n)`.
    pub fn spectrum(&self) -> &[f64] {
        &self.spectrum
    }

    /// Mass of the cell-averaged kernel before renormalization.
    pub fn raw_mass(&self) -> f64 {
        self.raw_mass
    }

    /// Largest pointwise kernel value seen by the grid, `max κ_j / h^d`.
    pub fn max_density(&self) -> f64 {
        self.weights.iter().copied().fold(0.0, f64::max) / self.grid.cell_volume()
    }

    /// Grid-consistent spectral gap `σ_h = 1 − max_{k≠0} κ̂(k)` and its mode.
    pub fn sigma(&self) -> (f64, Vec<i64>) {
        let d = self.grid.dim();
        let mut best = f64::NEG_INFINITY;
        let mut arg = vec![0; d];
        let mut arg_norm = i64::MAX;
        for (k, &v) in self.spectrum.iter().enumerate().skip(1) {
            let m = self.grid.multi_index(k);
            let mode: Vec<i64> = m[..d].iter().map(|&a| self.grid.signed(a)).collect();
            let norm: i64 = mode.iter().map(|c| c * c).sum();
            let tie = (v - best).abs() <= 1e-14;
            let better = v > best + 1e-14 || (tie && (norm < arg_norm || (norm == arg_norm && mode > arg)));
            if better {
                best = v;
                arg = mode;
                arg_norm = norm;
            }
        }
        (1.0 - best, arg)
    }

    /// `(φ * f)_a = Σ_b κ_{a−b} f_b` via FFT.
    pub fn convolve(&self, f: &[f64]) -> Vec<f64> {
        let mut buf: Vec<Complex<f64>> = f.iter().map(|&v| Complex::new(v, 0.0)).collect();
        fft_nd(&mut buf, self.grid.n, self.grid.dim(), false);
        buf.iter_mut().zip(&self.spectrum).for_each(|(c, s)| *c *= s);
        fft_nd(&mut buf, self.grid.n, self.grid.dim(), true);
        buf.iter().map(|c| c.re).collect()
    }

    /// Direct `O(M²)` evaluation of [`convolve`](Self::convolve).
    pub fn convolve_direct(&self, f: &[f64]) -> Vec<f64> {
        let g = &self.grid;
        let d = g.dim();
        let n = g.n;
        (0..g.len())
            .map(|a| {
                let ma = g.multi_index(a);
                (0..g.len())
                    .map(|b| {
                        let mb = g.multi_index(b);
                        let mut diff = [0usize; 3];
                        for k in 0..d {
                            diff[k] = (ma[k] + n - mb[k]) % n;
                        }
                        self.weights[g.flat_index(&diff[..d])] * f[b]
                    })
                    .sum()
            })
            .collect()
    }

    /// Weight `κ_{a−b}` between nodes `a` and `b`.
    pub fn pair_weight(&self, a: usize, b: usize) -> f64 {
        let g = &self.grid;
        let (ma, mb) = (g.multi_index(a), g.multi_index(b));
        let mut diff = [0usize; 3];
        for k in 0..g.dim() {
            diff[k] = (ma[k] + g.n - mb[k]) % g.n;
        }
        self.weights[g.flat_index(&diff[..g.dim()])]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{normalize_kernel, KernelFamily};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn spectral_weights_reproduce_continuum_coefficients() {
        let dom = DomainSpec::standard_torus(1);
        let g = Grid::new(dom, 128).unwrap();
        let k = normalize_kernel(&KernelSpec::indicator(1.0), &dom).unwrap();
        let gk = GridKernel::spectral(&k, &g).unwrap();
        assert!((gk.spectrum()[1] - 1f64.sin()).abs() < 1e-14);
        assert!((gk.weights().iter().sum::<f64>() - 1.0).abs() < 1e-13);
        let (sigma, mode) = gk.sigma();
        assert!((sigma - (1.0 - 1f64.sin())).abs() < 1e-14);
        assert_eq!(mode, vec![1]);
        let f = g.sample(|x| (2.0 * x[0]).cos());
        let c = gk.convolve(&f);
        assert!(c.iter().zip(&f).all(|(a, b)| (a - 0.5 * 2f64.sin() * b).abs() < 1e-13));

        let dom2 = DomainSpec::standard_torus(2);
        let g2 = Grid::new(dom2, 16).unwrap();
        let k2 = normalize_kernel(&KernelSpec::indicator(1.0), &dom2).unwrap();
        let gk2 = GridKernel::spectral(&k2, &g2).unwrap();
        assert!((gk2.spectrum()[1] - 2.0 * crate::special::bessel_j1(1.0)).abs() < 1e-13);
    }

    #[test]
    fn grid_indexing_roundtrips() {
        let g = Grid::new(DomainSpec::standard_torus(3), 5).unwrap();
        for i in 0..g.len() {
            let m = g.multi_index(i);
            assert_eq!(g.flat_index(&m), i);
        }
        assert_eq!(g.shifted(0, 1, -1), g.flat_index(&[0, 4, 0]));
        assert!(Grid::new(DomainSpec::free(1).unwrap(), 8).is_err());
    }

    #[test]
    fn fft_convolution_matches_direct() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for (d, n) in [(1, 64), (2, 12), (3, 6)] {
            let dom = DomainSpec::standard_torus(d);
            let g = Grid::new(dom, n).unwrap();
            let k = normalize_kernel(&KernelSpec::new(KernelFamily::Indicator { radius: 1.3 }), &dom).unwrap();
            let gk = GridKernel::new(&k, &g).unwrap();
            assert!((gk.weights().iter().sum::<f64>() - 1.0).abs() < 1e-14);
            let f: Vec<f64> = (0..g.len()).map(|_| rng.gen_range(0.0..2.0)).collect();
            let a = gk.convolve(&f);
            let b = gk.convolve_direct(&f);
            for (x, y) in a.iter().zip(&b) {
                assert!((x - y).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn spectrum_is_real_and_symmetric() {
        let dom = DomainSpec::standard_torus(2);
        let g = Grid::new(dom, 16).unwrap();
        let k = normalize_kernel(&KernelSpec::fat_tail(0.6), &dom).unwrap();
        let gk = GridKernel::new(&k, &g).unwrap();
        let mut buf: Vec<Complex<f64>> = gk.weights().iter().map(|&w| Complex::new(w, 0.0)).collect();
        fft_nd(&mut buf, 16, 2, false);
        assert!(buf.iter().all(|c| c.im.abs() < 1e-15));
        assert!((gk.spectrum()[0] - 1.0).abs() < 1e-14);
        let (s, mode) = gk.sigma();
        assert!(s > 0.0 && s <= 1.0);
        assert_eq!(mode.iter().map(|c| c * c).sum::<i64>(), 1);
    }

    #[test]
    fn one_dimensional_indicator_cells_are_exact() {
        // 1(|x| ≤ 1)/2 on a 2π grid: interior cells carry h/2, edge cells the covered part
        let dom = DomainSpec::standard_torus(1);
        let g = Grid::new(dom, 64).unwrap();
        let k = KernelSpec::with_scale(KernelFamily::Indicator { radius: 1.0 }, 0.5);
        let gk = GridKernel::new(&k, &g).unwrap();
        assert!((gk.raw_mass() - 1.0).abs() < 1e-14);
    }
}
