use std::collections::HashMap;
use std::f64::consts::TAU;

use rustfft::num_complex::Complex;
use serde::{Deserialize, Serialize};

use super::grid::fft_nd;
use crate::error::{Error, Result};
use crate::geometry::{cube_integral, kernel_mass, DomainSpec, KernelFamily, KernelSpec};
use crate::quad::Composite;
use crate::special::bessel_j1;

/// Mode search radius used when none is given: 64, 16 and 8 per axis.
pub fn default_k_max(dim: usize) -> usize {
    match dim {
        1 => 64,
        2 => 16,
        _ => 8,
    }
}

/// Trapezoid grid used for kernels without a closed form in `d ≥ 2`.
fn trapezoid_nodes(dim: usize, k_max: usize) -> usize {
    match dim {
        2 => (4 * k_max).max(512),
        _ => (4 * k_max).max(64),
    }
}

fn torus_period(domain: &DomainSpec) -> Result<f64> {
    domain.validate()?;
    domain.period().ok_or(Error::NotTorus)
}

/// Closed-form coefficient of an indicator whose ball fits in the cell.
fn indicator_coefficient(radius: f64, scale: f64, omega: f64, dim: usize) -> f64 {
    let x = omega * radius;
    scale
        * match dim {
            1 => 2.0 * x.sin() / omega,
            2 => TAU * radius * bessel_j1(x) / omega,
            _ => 2.0 * TAU * (x.sin() - x * x.cos()) / omega.powi(3),
        }
}

/// `∫_{T^d} φ(|x|) cos(2π k·x / L) dx`.
///
/// Indicators contained in the fundamental cell use the closed radial
/// formulas; other one-dimensional kernels use piecewise Gauss–Legendre
/// with panels scaled to the frequency; other kernels in `d ≥ 2` use the
/// tensor-product trapezoid rule.
pub fn kernel_fourier_coefficient(kernel: &KernelSpec, k: &[i64], domain: &DomainSpec) -> Result<f64> {
    let l = torus_period(domain)?;
    domain.check_point(&vec![0.0; k.len()])?;
    if k.iter().all(|&c| c == 0) {
        return kernel_mass(kernel, domain);
    }
    let kn = k.iter().map(|&c| (c * c) as f64).sum::<f64>().sqrt();
    let omega = TAU * kn / l;
    match kernel.family {
        KernelFamily::Indicator { radius } if radius <= 0.5 * l => {
            Ok(indicator_coefficient(radius, kernel.scale, omega, domain.dim))
        }
        _ if domain.dim == 1 => Ok(one_dim_quadrature(kernel, omega, l)),
        _ => {
            let n = trapezoid_nodes(domain.dim, k.iter().map(|c| c.unsigned_abs() as usize).max().unwrap_or(0));
            Ok(trapezoid_coefficient(kernel, k, domain, n))
        }
    }
}

fn one_dim_quadrature(kernel: &KernelSpec, omega: f64, l: f64) -> f64 {
    let panels = 8 + (omega * l / TAU).ceil() as usize * 2;
    let q = Composite::new(10, panels);
    2.0 * q.integrate(0.0, 0.5 * l, &kernel.family.breakpoints(), |r| kernel.radial(r) * (omega * r).cos())
}

/// Tensor-product trapezoid rule with `n` nodes per axis at `x_j = j h`.
pub fn trapezoid_coefficient(kernel: &KernelSpec, k: &[i64], domain: &DomainSpec, n: usize) -> f64 {
    let l = domain.period().expect("torus");
    let d = domain.dim;
    let h = l / n as f64;
    let total = n.pow(d as u32);
    let mut acc = 0.0;
    for idx in 0..total {
        let mut rem = idx;
        let mut r2 = 0.0;
        let mut phase = 0.0;
        for &kc in k.iter().take(d) {
            let a = rem % n;
            rem /= n;
            let s = if a > n / 2 { a as f64 - n as f64 } else { a as f64 };
            r2 += (s * h).powi(2);
            phase += kc as f64 * s / n as f64;
        }
        acc += kernel.radial(r2.sqrt()) * (TAU * phase).cos();
    }
    acc * h.powi(d as i32)
}

/// All trapezoid coefficients on an `n^d` grid at once, indexed like the grid.
fn trapezoid_spectrum(kernel: &KernelSpec, domain: &DomainSpec, n: usize) -> Vec<f64> {
    let l = domain.period().expect("torus");
    let d = domain.dim;
    let h = l / n as f64;
    let total = n.pow(d as u32);
    let mut buf: Vec<Complex<f64>> = (0..total)
        .map(|idx| {
            let mut rem = idx;
            let mut r2 = 0.0;
            for _ in 0..d {
                let a = rem % n;
                rem /= n;
                let s = if a > n / 2 { a as f64 - n as f64 } else { a as f64 };
                r2 += (s * h).powi(2);
            }
            Complex::new(kernel.radial(r2.sqrt()), 0.0)
        })
        .collect();
    fft_nd(&mut buf, n, d, false);
    let vol = h.powi(d as i32);
    buf.iter().map(|c| c.re * vol).collect()
}

/// `W` in the decay estimate `|c(k)| ≤ L W / (2π |k|_∞)`: the integral over
/// transverse coordinates of the total variation of `φ` along a coordinate
/// line. Exact in one dimension; padded by 5% when computed by quadrature.
pub fn tail_variation(kernel: &KernelSpec, domain: &DomainSpec) -> Result<f64> {
    let l = torus_period(domain)?;
    let half = 0.5 * l;
    let fam = &kernel.family;
    if domain.dim == 1 {
        return Ok(2.0 * kernel.scale * fam.variation(0.0, half));
    }
    let line_tv = |y: &[f64]| {
        let s = y.iter().map(|v| v * v).sum::<f64>().sqrt();
        2.0 * fam.variation(s, (half * half + s * s).sqrt())
    };
    let w = cube_integral(domain.dim - 1, half, &fam.breakpoints(), line_tv);
    Ok(1.05 * kernel.scale * w)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModeCoefficient {
    pub mode: Vec<i64>,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FourierGapResult {
    pub sigma: f64,
    pub argmax_mode: Vec<i64>,
    /// Coefficient at `k = 0`, the kernel mass.
    pub zero_mode: f64,
    pub coefficients: Vec<ModeCoefficient>,
    #[serde(rename = "K_max")]
    pub k_max: usize,
    /// Upper bound on every coefficient with `|k|_∞ > K_max`.
    pub tail_bound: f64,
    pub tail_variation: f64,
}

impl FourierGapResult {
    pub fn coefficient(&self, mode: &[i64]) -> Option<f64> {
        self.coefficients.iter().find(|c| c.mode == mode).map(|c| c.value)
    }
}

/// `σ_φ = 1 − max_{0 < |k|_∞ ≤ K_max} c(k)`, certified against all modes
/// beyond `K_max` by the total-variation tail bound.
///
/// Ties go to the smaller `|k|`, then to the lexicographically larger mode,
/// so `(1, 0)` is reported rather than `(−1, 0)` or `(0, 1)`.
pub fn sigma_phi(kernel: &KernelSpec, domain: &DomainSpec, k_max: usize) -> Result<FourierGapResult> {
    let l = torus_period(domain)?;
    if k_max == 0 {
        return Err(Error::InvalidParameter("K_max must be at least 1".into()));
    }
    let d = domain.dim;
    let closed_or_1d = d == 1 || matches!(kernel.family, KernelFamily::Indicator { radius } if radius <= 0.5 * l);
    let (spectrum, n) = if closed_or_1d {
        (None, 0)
    } else {
        let n = trapezoid_nodes(d, k_max);
        (Some(trapezoid_spectrum(kernel, domain, n)), n)
    };
    // the coefficient only depends on the sorted absolute mode
    let mut memo: HashMap<Vec<i64>, f64> = HashMap::new();
    let mut coefficient = |mode: &[i64]| -> Result<f64> {
        let mut key: Vec<i64> = mode.iter().map(|c| c.abs()).collect();
        key.sort_unstable();
        if let Some(v) = memo.get(&key) {
            return Ok(*v);
        }
        let v = match &spectrum {
            None => kernel_fourier_coefficient(kernel, &key, domain)?,
            Some(s) => {
                let idx = key.iter().rev().fold(0usize, |acc, &c| acc * n + c as usize);
                s[idx]
            }
        };
        memo.insert(key, v);
        Ok(v)
    };
    let side = 2 * k_max + 1;
    let mut coefficients = Vec::with_capacity(side.pow(d as u32) - 1);
    let mut best = f64::NEG_INFINITY;
    let mut arg: Vec<i64> = Vec::new();
    let mut arg_norm = i64::MAX;
    for code in 0..side.pow(d as u32) {
        let mut c = code;
        let mode: Vec<i64> = (0..d)
            .map(|_| {
                let v = (c % side) as i64 - k_max as i64;
                c /= side;
                v
            })
            .collect();
        if mode.iter().all(|&v| v == 0) {
            continue;
        }
        let v = coefficient(&mode)?;
        let norm: i64 = mode.iter().map(|c| c * c).sum();
        let tie = (v - best).abs() <= 1e-14;
        if v > best + 1e-14 || (tie && (norm < arg_norm || (norm == arg_norm && mode > arg))) {
            best = v;
            arg = mode.clone();
            arg_norm = norm;
        }
        coefficients.push(ModeCoefficient { mode, value: v });
    }
    let zero_mode = coefficient(&vec![0; d])?;
    let w = tail_variation(kernel, domain)?;
    let tail_bound = l * w / (TAU * (k_max + 1) as f64);
    if tail_bound > best + 1e-12 {
        return Err(Error::TailInconclusive { k_max, bound: tail_bound, max: best });
    }
    Ok(FourierGapResult {
        sigma: 1.0 - best,
        argmax_mode: arg,
        zero_mode,
        coefficients,
        k_max,
        tail_bound,
        tail_variation: w,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::normalize_kernel;
    use std::f64::consts::PI;

    fn t(d: usize) -> DomainSpec {
        DomainSpec::standard_torus(d)
    }

    #[test]
    fn one_dimensional_indicator_coefficients() {
        let k = normalize_kernel(&KernelSpec::indicator(1.0), &t(1)).unwrap();
        assert!((kernel_fourier_coefficient(&k, &[0], &t(1)).unwrap() - 1.0).abs() < 1e-12);
        assert!((kernel_fourier_coefficient(&k, &[1], &t(1)).unwrap() - 1f64.sin()).abs() < 1e-14);
        assert!((kernel_fourier_coefficient(&k, &[2], &t(1)).unwrap() - 0.5 * 2f64.sin()).abs() < 1e-14);
        assert!((kernel_fourier_coefficient(&k, &[-2], &t(1)).unwrap() - 0.5 * 2f64.sin()).abs() < 1e-14);
        // generic quadrature path agrees with the closed form
        let wide = normalize_kernel(&KernelSpec::indicator(4.0), &t(1)).unwrap();
        let c = kernel_fourier_coefficient(&wide, &[3], &t(1)).unwrap();
        // 1(|x| ≤ 4) on the circle of length 2π covers everything
        assert!(c.abs() < 1e-13);
    }

    #[test]
    fn sigma_examples() {
        let k = normalize_kernel(&KernelSpec::indicator(1.0), &t(1)).unwrap();
        let r = sigma_phi(&k, &t(1), 64).unwrap();
        assert!((r.sigma - (1.0 - 1f64.sin())).abs() < 1e-12);
        assert_eq!(r.argmax_mode, vec![1]);
        assert!((r.zero_mode - 1.0).abs() < 1e-8);

        let k2 = normalize_kernel(&KernelSpec::indicator(1.0), &t(2)).unwrap();
        let r2 = sigma_phi(&k2, &t(2), 16).unwrap();
        assert!((r2.sigma - (1.0 - 2.0 * bessel_j1(1.0))).abs() < 1e-12);
        assert_eq!(r2.argmax_mode, vec![1, 0]);

        for d in 1..=2 {
            let c = normalize_kernel(&KernelSpec::new(KernelFamily::Constant), &t(d)).unwrap();
            assert!((c.scale - (2.0 * PI).powi(-(d as i32))).abs() < 1e-15);
            let r = sigma_phi(&c, &t(d), default_k_max(d)).unwrap();
            assert!((r.sigma - 1.0).abs() < 1e-10, "d={d}: {}", r.sigma);
        }
    }

    #[test]
    fn coefficients_are_even_in_k() {
        let k = normalize_kernel(&KernelSpec::fat_tail(0.5), &t(2)).unwrap();
        let r = sigma_phi(&k, &t(2), 6).unwrap();
        for c in &r.coefficients {
            let neg: Vec<i64> = c.mode.iter().map(|v| -v).collect();
            assert_eq!(r.coefficient(&neg), Some(c.value));
        }
    }

    #[test]
    fn tail_bound_dominates_computed_coefficients() {
        let fams = [
            KernelFamily::Indicator { radius: 1.0 },
            KernelFamily::IncreasingCompact { radius: 2.0 },
            KernelFamily::FatTail { theta: 0.5 },
            KernelFamily::Tabulated { radii: vec![0.0, 1.0, 2.0], values: vec![1.0, 0.5, 0.0] },
        ];
        for d in 1..=2 {
            for f in &fams {
                let k = normalize_kernel(&KernelSpec::new(f.clone()), &t(d)).unwrap();
                let w = tail_variation(&k, &t(d)).unwrap();
                let kmax = default_k_max(d);
                let r = sigma_phi(&k, &t(d), kmax);
                let coeffs = match r {
                    Ok(r) => r.coefficients,
                    Err(Error::TailInconclusive { .. }) => continue,
                    Err(e) => panic!("{e}"),
                };
                for c in coeffs {
                    let kinf = c.mode.iter().map(|v| v.unsigned_abs()).max().unwrap() as f64;
                    if kinf > kmax as f64 / 2.0 {
                        assert!(c.value.abs() <= w / kinf + 1e-12, "{f:?} d={d} {:?}", c.mode);
                    }
                }
            }
        }
    }

    #[test]
    fn inconclusive_tail_is_reported() {
        // wide flat kernel: every small mode is tiny, tail bound stays larger
        let k = normalize_kernel(&KernelSpec::new(KernelFamily::IncreasingCompact { radius: 3.0 }), &t(1)).unwrap();
        match sigma_phi(&k, &t(1), 1) {
            Err(Error::TailInconclusive { k_max: 1, .. }) => {}
            other => panic!("expected inconclusive tail, got {other:?}"),
        }
    }

    #[test]
    fn free_space_is_rejected() {
        let f = DomainSpec::free(1).unwrap();
        assert!(matches!(kernel_fourier_coefficient(&KernelSpec::indicator(1.0), &[1], &f), Err(Error::NotTorus)));
    }

    #[test]
    fn two_dimensional_disc_matches_independent_quadrature() {
        // (1/π) ∫_{|x|≤1} cos x₁ dx = (2/π) ∫_{−π/2}^{π/2} cos²θ cos(sin θ) dθ
        let n = 400;
        let h = PI / n as f64;
        let oracle: f64 =
            (0..n).map(|i| -0.5 * PI + (i as f64 + 0.5) * h).map(|th| th.cos().powi(2) * th.sin().cos()).sum::<f64>()
                * h
                * 2.0
                / PI;
        let k = normalize_kernel(&KernelSpec::indicator(1.0), &t(2)).unwrap();
        let c = kernel_fourier_coefficient(&k, &[1, 0], &t(2)).unwrap();
        assert!((c - oracle).abs() < 1e-12, "{c} vs {oracle}");
        // and the trapezoid fallback is in the right neighbourhood
        assert!((trapezoid_coefficient(&k, &[1, 0], &t(2), 512) - oracle).abs() < 1e-3);
    }
}
