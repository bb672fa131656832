use std::collections::HashMap;

use super::ParticleEnsemble;
use crate::error::Result;
use crate::geometry::{eval_topological, hessian_into, AlignmentWeight, KernelSpec, MatrixKernelSpec};
use crate::quad::CompensatedSum;

/// Pair weight `φ_ij`, including the crowd factor for topological kernels.
fn pair_weight(ens: &ParticleEnsemble, kernel: &KernelSpec, i: usize, j: usize) -> Result<f64> {
    let domain = ens.domain();
    if kernel.is_topological() {
        eval_topological(kernel, ens.positions(), ens.position(i), ens.position(j), domain)
    } else {
        Ok(kernel.radial(domain.distance(ens.position(i), ens.position(j))))
    }
}

/// Accumulates `φ_ij (v_j − v_i)` into rows `i` and `j` with opposite signs.
fn add_pair(acc: &mut [CompensatedSum], ens: &ParticleEnsemble, i: usize, j: usize, w: f64) {
    let d = ens.dim();
    let (vi, vj) = (ens.velocity(i), ens.velocity(j));
    for k in 0..d {
        let f = w * (vj[k] - vi[k]);
        acc[i * d + k].add(f);
        acc[j * d + k].add(-f);
    }
}

fn finish(acc: Vec<CompensatedSum>, factor: f64) -> Vec<f64> {
    acc.into_iter().map(|s| factor * s.value()).collect()
}

/// Alignment accelerations `a_i = (τ/N) Σ_j φ_ij (v_j − v_i)`.
///
/// Pairs are visited once each, in lexicographic order, and the
/// antisymmetric contribution is added to both rows with compensated sums.
pub fn cs_rhs(ens: &ParticleEnsemble, kernel: &KernelSpec, tau: f64) -> Result<Vec<f64>> {
    let n = ens.n();
    let mut acc = vec![CompensatedSum::default(); n * ens.dim()];
    for i in 0..n {
        for j in i + 1..n {
            let w = pair_weight(ens, kernel, i, j)?;
            add_pair(&mut acc, ens, i, j, w);
        }
    }
    Ok(finish(acc, tau / n as f64))
}

/// Same as [`cs_rhs`] for compactly supported kernels, visiting only pairs
/// in neighbouring cells. Skipped pairs carry zero weight, and adding zero
/// to a compensated sum is exact, so the result is bitwise identical.
pub fn cs_rhs_cell_list(ens: &ParticleEnsemble, kernel: &KernelSpec, tau: f64) -> Result<Vec<f64>> {
    let Some(radius) = kernel.family.support_radius() else {
        return cs_rhs(ens, kernel, tau);
    };
    let Some(pairs) = neighbour_pairs(ens, radius) else {
        return cs_rhs(ens, kernel, tau);
    };
    let n = ens.n();
    let mut acc = vec![CompensatedSum::default(); n * ens.dim()];
    for (i, j) in pairs {
        let w = pair_weight(ens, kernel, i, j)?;
        add_pair(&mut acc, ens, i, j, w);
    }
    Ok(finish(acc, tau / n as f64))
}

/// Candidate pairs `i < j` in lexicographic order, or `None` when the torus
/// is too small for cells to prune anything.
fn neighbour_pairs(ens: &ParticleEnsemble, radius: f64) -> Option<Vec<(usize, usize)>> {
    let d = ens.dim();
    let domain = ens.domain();
    let (cells_per_axis, side) = match domain.period() {
        Some(l) => {
            let m = (l / radius).floor() as i64;
            if m < 3 {
                return None;
            }
            (Some(m), l / m as f64)
        }
        None => (None, radius),
    };
    let cell_of = |x: &[f64]| -> Vec<i64> {
        x.iter()
            .map(|c| {
                let k = (c / side).floor() as i64;
                cells_per_axis.map_or(k, |m| k.rem_euclid(m))
            })
            .collect()
    };
    let mut grid: HashMap<Vec<i64>, Vec<usize>> = HashMap::new();
    for i in 0..ens.n() {
        grid.entry(cell_of(ens.position(i))).or_default().push(i);
    }
    let offsets: Vec<Vec<i64>> = (0..3usize.pow(d as u32))
        .map(|mut code| {
            (0..d)
                .map(|_| {
                    let o = (code % 3) as i64 - 1;
                    code /= 3;
                    o
                })
                .collect()
        })
        .collect();
    let mut pairs = Vec::new();
    let mut neigh = Vec::new();
    for i in 0..ens.n() {
        let c = cell_of(ens.position(i));
        neigh.clear();
        for off in &offsets {
            let key: Vec<i64> =
                c.iter().zip(off).map(|(a, b)| cells_per_axis.map_or(a + b, |m| (a + b).rem_euclid(m))).collect();
            if let Some(list) = grid.get(&key) {
                neigh.extend(list.iter().copied().filter(|&j| j > i));
            }
        }
        neigh.sort_unstable();
        neigh.dedup();
        pairs.extend(neigh.iter().map(|&j| (i, j)));
    }
    Some(pairs)
}

/// Textbook double loop, kept as an independent reference.
pub fn naive_cs_rhs(ens: &ParticleEnsemble, kernel: &KernelSpec, tau: f64) -> Result<Vec<f64>> {
    let n = ens.n();
    let d = ens.dim();
    let mut out = vec![0.0; n * d];
    for i in 0..n {
        for j in 0..n {
            let w = if i == j { 0.0 } else { pair_weight(ens, kernel, i, j)? };
            for k in 0..d {
                out[i * d + k] += tau / n as f64 * w * (ens.velocity(j)[k] - ens.velocity(i)[k]);
            }
        }
    }
    Ok(out)
}

/// Three-zone accelerations
/// `a_i = (τ/N) Σ_j Φ_ij (v_j − v_i) − (1/N) Σ_j U′(r_ij) (x_i − x_j)/r_ij`.
///
/// With `U′ > 0` the force pulls agents together.
pub fn three_zone_rhs(ens: &ParticleEnsemble, mkernel: &MatrixKernelSpec, tau: f64) -> Result<Vec<f64>> {
    let n = ens.n();
    let d = ens.dim();
    let domain = ens.domain();
    let mut align = vec![CompensatedSum::default(); n * d];
    let mut force = vec![CompensatedSum::default(); n * d];
    let mut z = vec![0.0; d];
    let mut phi = vec![0.0; d * d];
    for i in 0..n {
        for j in i + 1..n {
            // z = x_j − x_i, minimum image
            domain.displacement(ens.position(i), ens.position(j), &mut z);
            let r = z.iter().map(|v| v * v).sum::<f64>().sqrt();
            match &mkernel.alignment {
                AlignmentWeight::Hessian => hessian_into(&mkernel.potential, &z, &mut phi)?,
                AlignmentWeight::Scalar { kernel } => {
                    phi.iter_mut().for_each(|v| *v = 0.0);
                    let w = pair_weight(ens, kernel, i, j)?;
                    (0..d).for_each(|k| phi[k * d + k] = w);
                }
            }
            let (vi, vj) = (ens.velocity(i), ens.velocity(j));
            for a in 0..d {
                let f: f64 = (0..d).map(|b| phi[a * d + b] * (vj[b] - vi[b])).sum::<f64>() * mkernel.scale;
                align[i * d + a].add(f);
                align[j * d + a].add(-f);
            }
            if r > 0.0 {
                let du = mkernel.potential.d1(r);
                for a in 0..d {
                    // −U′(r)(x_i − x_j)/r = U′(r) z/r on agent i
                    let f = du * z[a] / r;
                    force[i * d + a].add(f);
                    force[j * d + a].add(-f);
                }
            }
        }
    }
    let inv_n = 1.0 / n as f64;
    Ok(align.into_iter().zip(force).map(|(a, f)| tau * inv_n * a.value() + inv_n * f.value()).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{normalize_kernel, DomainSpec, KernelFamily, Potential};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_ensemble(n: usize, domain: DomainSpec, seed: u64) -> ParticleEnsemble {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let d = domain.dim;
        let hi = domain.period().unwrap_or(10.0);
        let x = (0..n * d).map(|_| rng.gen_range(0.0..hi)).collect();
        let v = (0..n * d).map(|_| rng.gen_range(-1.0..1.0)).collect();
        ParticleEnsemble::new(x, v, domain).unwrap()
    }

    #[test]
    fn equal_velocities_give_zero() {
        let t2 = DomainSpec::standard_torus(2);
        let x = vec![0.1, 0.2, 3.0, 1.0, 5.0, 6.0];
        let ens = ParticleEnsemble::new(x, [0.3, -0.7].repeat(3), t2).unwrap();
        let k = normalize_kernel(&KernelSpec::fat_tail(0.5), &t2).unwrap();
        assert!(cs_rhs(&ens, &k, 2.0).unwrap().iter().all(|&a| a == 0.0));
    }

    #[test]
    fn two_agents_constant_kernel() {
        let f1 = DomainSpec::free(1).unwrap();
        let ens = ParticleEnsemble::new(vec![0.0, 3.0], vec![2.0, -1.0], f1).unwrap();
        let (tau, c) = (1.5, 0.25);
        let a = cs_rhs(&ens, &KernelSpec::constant(c), tau).unwrap();
        let w = 3.0;
        assert!((a[0] + tau * c / 2.0 * w).abs() < 1e-15);
        assert!((a[1] - tau * c / 2.0 * w).abs() < 1e-15);
    }

    #[test]
    fn matches_double_loop_reference() {
        let t1 = DomainSpec::standard_torus(1);
        let k = normalize_kernel(&KernelSpec::fat_tail(0.5), &t1).unwrap();
        for seed in 0..20 {
            let ens = random_ensemble(4, t1, seed);
            let a = cs_rhs(&ens, &k, 1.0).unwrap();
            let b = naive_cs_rhs(&ens, &k, 1.0).unwrap();
            for (x, y) in a.iter().zip(&b) {
                assert!((x - y).abs() < 1e-14);
            }
        }
        let t3 = DomainSpec::standard_torus(3);
        let ens = random_ensemble(30, t3, 9);
        let topo = KernelSpec::new(KernelFamily::Topological { radius: 2.5, beta: 1.0, gamma: 0.5 });
        let a = cs_rhs(&ens, &topo, 1.0).unwrap();
        let b = naive_cs_rhs(&ens, &topo, 1.0).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).abs() < 1e-14);
        }
    }

    #[test]
    fn momentum_is_conserved_by_rhs() {
        let t2 = DomainSpec::standard_torus(2);
        let k = normalize_kernel(&KernelSpec::fat_tail(0.3), &t2).unwrap();
        let ens = random_ensemble(200, t2, 3);
        let a = cs_rhs(&ens, &k, 1.0).unwrap();
        let total: f64 = a.iter().step_by(2).sum();
        let scale: f64 = a.iter().map(|v| v.abs()).sum();
        assert!(total.abs() <= 1e-15 * scale);
    }

    #[test]
    fn cell_list_is_bitwise_identical() {
        for (domain, radius) in [
            (DomainSpec::standard_torus(1), 0.4),
            (DomainSpec::standard_torus(2), 0.9),
            (DomainSpec::standard_torus(3), 1.2),
            (DomainSpec::free(2).unwrap(), 1.5),
        ] {
            let ens = random_ensemble(300, domain, 17);
            for fam in [KernelFamily::Indicator { radius }, KernelFamily::IncreasingCompact { radius }] {
                let k = KernelSpec::new(fam);
                assert_eq!(cs_rhs(&ens, &k, 1.0).unwrap(), cs_rhs_cell_list(&ens, &k, 1.0).unwrap());
            }
        }
    }

    #[test]
    fn harmonic_pair_attracts() {
        let f1 = DomainSpec::free(1).unwrap();
        let ens = ParticleEnsemble::new(vec![-1.0, 1.0], vec![0.0, 0.0], f1).unwrap();
        let mk = MatrixKernelSpec::hessian(Potential::Power { coefficient: 1.0, exponent: 2.0 });
        let a = three_zone_rhs(&ens, &mk, 1.0).unwrap();
        assert_eq!(a, vec![1.0, -1.0]);
    }

    #[test]
    fn harmonic_equilibrium_at_centroid() {
        let f2 = DomainSpec::free(2).unwrap();
        let ens = ParticleEnsemble::new(vec![0.5; 6], vec![0.0; 6], f2).unwrap();
        let mk = MatrixKernelSpec::hessian(Potential::Power { coefficient: 1.0, exponent: 2.0 });
        assert!(three_zone_rhs(&ens, &mk, 1.0).unwrap().iter().all(|&a| a == 0.0));
    }

    #[test]
    fn zero_potential_reduces_to_scalar_alignment() {
        let t2 = DomainSpec::standard_torus(2);
        let k = normalize_kernel(&KernelSpec::indicator(2.0), &t2).unwrap();
        let ens = random_ensemble(40, t2, 5);
        let mk = MatrixKernelSpec::scalar(k.clone(), Potential::Zero);
        let a = three_zone_rhs(&ens, &mk, 0.7).unwrap();
        let b = cs_rhs(&ens, &k, 0.7).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).abs() < 1e-15);
        }
    }
}
