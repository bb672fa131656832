use serde::{Deserialize, Serialize};

use super::domain::DomainSpec;
use super::kernel::{eval_kernel, KernelSpec};
use crate::error::{Error, Result};

/// Radial interaction potential `U(r)`.
///
/// `U′ > 0` pulls agents together, `U′ < 0` pushes them apart.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Potential {
    Zero,
    /// `U(r) = coefficient · r^p / p`.
    Power {
        coefficient: f64,
        exponent: f64,
    },
    /// `U(r) = −c_a e^{−r/l_a} + c_r e^{−r/l_r}`.
    Morse {
        ca: f64,
        la: f64,
        cr: f64,
        lr: f64,
    },
}

impl Potential {
    pub fn value(&self, r: f64) -> f64 {
        match *self {
            Potential::Zero => 0.0,
            Potential::Power { coefficient, exponent } => coefficient * r.powf(exponent) / exponent,
            Potential::Morse { ca, la, cr, lr } => -ca * (-r / la).exp() + cr * (-r / lr).exp(),
        }
    }

    /// `U′(r)`.
    pub fn d1(&self, r: f64) -> f64 {
        match *self {
            Potential::Zero => 0.0,
            Potential::Power { coefficient, exponent } => coefficient * r.powf(exponent - 1.0),
            Potential::Morse { ca, la, cr, lr } => ca / la * (-r / la).exp() - cr / lr * (-r / lr).exp(),
        }
    }

    /// `U″(r)`.
    pub fn d2(&self, r: f64) -> f64 {
        match *self {
            Potential::Zero => 0.0,
            Potential::Power { coefficient, exponent } => coefficient * (exponent - 1.0) * r.powf(exponent - 2.0),
            Potential::Morse { ca, la, cr, lr } => -ca / (la * la) * (-r / la).exp() + cr / (lr * lr) * (-r / lr).exp(),
        }
    }

    /// Whether `x ↦ U(|x|)` is twice differentiable at `|x| = r`.
    pub fn smooth_at(&self, r: f64) -> bool {
        if r > 0.0 {
            return true;
        }
        match *self {
            Potential::Zero => true,
            Potential::Power { exponent, .. } => exponent == 2.0 || exponent >= 3.0,
            Potential::Morse { .. } => self.d1(0.0).abs() < 1e-12,
        }
    }

    /// `U″(0)` for potentials smooth at the origin, where the Hessian is
    /// `U″(0) · I`.
    fn curvature_at_origin(&self) -> f64 {
        match *self {
            Potential::Power { coefficient, exponent: 2.0 } => coefficient,
            Potential::Power { .. } | Potential::Zero => 0.0,
            Potential::Morse { .. } => self.d2(0.0),
        }
    }
}

/// Alignment weight used by the matrix kernel.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "kebab-case")]
pub enum AlignmentWeight {
    /// Pointwise Hessian `D²U(x_i − x_j)`.
    Hessian,
    /// `φ_ij · I` for a scalar kernel.
    Scalar { kernel: KernelSpec },
}

/// Anticipation-type kernel: Hessian (or scalar) alignment plus the
/// pairwise force of a radial potential.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixKernelSpec {
    pub potential: Potential,
    pub alignment: AlignmentWeight,
    #[serde(default = "one")]
    pub scale: f64,
}

fn one() -> f64 {
    1.0
}

impl MatrixKernelSpec {
    pub fn hessian(potential: Potential) -> Self {
        Self { potential, alignment: AlignmentWeight::Hessian, scale: 1.0 }
    }

    pub fn scalar(kernel: KernelSpec, potential: Potential) -> Self {
        Self { potential, alignment: AlignmentWeight::Scalar { kernel }, scale: 1.0 }
    }
}

/// Writes `D²U(z) = U″ ẑẑᵀ + (U′/r)(I − ẑẑᵀ)` for displacement `z` into the
/// row-major `d×d` buffer `out`.
pub(crate) fn hessian_into(potential: &Potential, z: &[f64], out: &mut [f64]) -> Result<()> {
    let d = z.len();
    let r = z.iter().map(|v| v * v).sum::<f64>().sqrt();
    if !potential.smooth_at(r) {
        return Err(Error::SingularPotential { radius: r });
    }
    out.iter_mut().for_each(|v| *v = 0.0);
    if r == 0.0 {
        let c = potential.curvature_at_origin();
        for i in 0..d {
            out[i * d + i] = c;
        }
        return Ok(());
    }
    let radial = potential.d2(r);
    let tangential = potential.d1(r) / r;
    for i in 0..d {
        for j in 0..d {
            let proj = z[i] * z[j] / (r * r);
            let id = if i == j { 1.0 } else { 0.0 };
            out[i * d + j] = radial * proj + tangential * (id - proj);
        }
    }
    // exact symmetry despite rounding in the products
    for i in 0..d {
        for j in 0..i {
            out[i * d + j] = out[j * d + i];
        }
    }
    Ok(())
}

/// Pairwise alignment matrix `Φ(x, x′)` as a row-major `d×d` vector.
pub fn matrix_kernel_eval(spec: &MatrixKernelSpec, x: &[f64], x2: &[f64], domain: &DomainSpec) -> Result<Vec<f64>> {
    domain.check_point(x)?;
    domain.check_point(x2)?;
    let d = domain.dim;
    let mut out = vec![0.0; d * d];
    match &spec.alignment {
        AlignmentWeight::Hessian => {
            // D²U is even in z and the displacement is exactly antisymmetric
            let mut z = vec![0.0; d];
            domain.displacement(x, x2, &mut z);
            hessian_into(&spec.potential, &z, &mut out)?;
        }
        AlignmentWeight::Scalar { kernel } => {
            let phi = eval_kernel(kernel, x, x2, domain)?;
            for i in 0..d {
                out[i * d + i] = phi;
            }
        }
    }
    out.iter_mut().for_each(|v| *v *= spec.scale);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::normalize_kernel;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn quadratic_hessian_is_identity() {
        let f2 = DomainSpec::free(2).unwrap();
        let spec = MatrixKernelSpec::hessian(Potential::Power { coefficient: 1.0, exponent: 2.0 });
        for (a, b) in [([0.0, 0.0], [1.0, 2.0]), ([3.0, -1.0], [3.0, -1.0])] {
            let m = matrix_kernel_eval(&spec, &a, &b, &f2).unwrap();
            for (i, v) in m.iter().enumerate() {
                let id = if i % 3 == 0 { 1.0 } else { 0.0 };
                assert!((v - id).abs() < 1e-15, "{m:?}");
            }
        }
    }

    #[test]
    fn quartic_in_one_dimension_matches_second_derivative() {
        // U = r⁴/4 ⇒ U″(r) = 3r², symbolic value 12 at r = 2
        let f1 = DomainSpec::free(1).unwrap();
        let spec = MatrixKernelSpec::hessian(Potential::Power { coefficient: 1.0, exponent: 4.0 });
        let m = matrix_kernel_eval(&spec, &[0.0], &[2.0], &f1).unwrap();
        assert!((m[0] - 12.0).abs() < 1e-12);
        // finite-difference check of U″ on the potential itself
        let p = Potential::Power { coefficient: 1.0, exponent: 4.0 };
        let h = 1e-4;
        let fd = (p.value(2.0 + h) - 2.0 * p.value(2.0) + p.value(2.0 - h)) / (h * h);
        assert!((fd - 12.0).abs() < 1e-5);
    }

    #[test]
    fn matrix_kernel_is_symmetric_and_swap_invariant() {
        let t3 = DomainSpec::standard_torus(3);
        let spec = MatrixKernelSpec::hessian(Potential::Morse { ca: 1.0, la: 2.0, cr: 0.5, lr: 0.5 });
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..200 {
            let a: Vec<f64> = (0..3).map(|_| rng.gen_range(0.0..6.0)).collect();
            let b: Vec<f64> = (0..3).map(|_| rng.gen_range(0.0..6.0)).collect();
            let m = matrix_kernel_eval(&spec, &a, &b, &t3).unwrap();
            let m2 = matrix_kernel_eval(&spec, &b, &a, &t3).unwrap();
            assert_eq!(m, m2);
            for i in 0..3 {
                for j in 0..3 {
                    assert_eq!(m[i * 3 + j], m[j * 3 + i]);
                }
            }
        }
    }

    #[test]
    fn hessian_matches_finite_differences() {
        let p = Potential::Morse { ca: 1.0, la: 2.0, cr: 0.5, lr: 0.5 };
        let z = [0.7, -0.4];
        let mut hess = [0.0; 4];
        hessian_into(&p, &z, &mut hess).unwrap();
        let u = |x: f64, y: f64| p.value((x * x + y * y).sqrt());
        let h = 1e-4;
        let fxx = (u(z[0] + h, z[1]) - 2.0 * u(z[0], z[1]) + u(z[0] - h, z[1])) / (h * h);
        let fxy = (u(z[0] + h, z[1] + h) - u(z[0] + h, z[1] - h) - u(z[0] - h, z[1] + h) + u(z[0] - h, z[1] - h))
            / (4.0 * h * h);
        assert!((hess[0] - fxx).abs() < 1e-6);
        assert!((hess[1] - fxy).abs() < 1e-6);
    }

    #[test]
    fn singular_radius_is_an_error() {
        let f2 = DomainSpec::free(2).unwrap();
        let spec = MatrixKernelSpec::hessian(Potential::Morse { ca: 1.0, la: 1.0, cr: 2.0, lr: 0.5 });
        let err = matrix_kernel_eval(&spec, &[1.0, 1.0], &[1.0, 1.0], &f2).unwrap_err();
        assert!(matches!(err, Error::SingularPotential { .. }));
        let cusp = MatrixKernelSpec::hessian(Potential::Power { coefficient: 1.0, exponent: 1.5 });
        assert!(matrix_kernel_eval(&cusp, &[0.0, 0.0], &[0.0, 0.0], &f2).is_err());
    }

    #[test]
    fn scalar_weight_agrees_with_eval_kernel() {
        let t2 = DomainSpec::standard_torus(2);
        let k = normalize_kernel(&KernelSpec::fat_tail(0.5), &t2).unwrap();
        let spec = MatrixKernelSpec::scalar(k.clone(), Potential::Zero);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..100 {
            let a = [rng.gen_range(0.0..6.0), rng.gen_range(0.0..6.0)];
            let b = [rng.gen_range(0.0..6.0), rng.gen_range(0.0..6.0)];
            let m = matrix_kernel_eval(&spec, &a, &b, &t2).unwrap();
            let phi = eval_kernel(&k, &a, &b, &t2).unwrap();
            assert_eq!(m, vec![phi, 0.0, 0.0, phi]);
        }
    }
}
