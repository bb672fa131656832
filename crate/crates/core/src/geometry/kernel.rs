use serde::{Deserialize, Serialize};

use super::domain::{DomainKind, DomainSpec};
use crate::error::{Error, Result};
use crate::quad::Composite;
use crate::special::ln_gamma;

/// Radial profile families. Every profile is bounded and non-negative.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case")]
pub enum KernelFamily {
    /// Pareto-type tail `⟨r⟩^{-θ}` with `⟨r⟩ = (1 + r²)^{1/2}`.
    FatTail {
        theta: f64,
    },
    /// Characteristic function of the closed ball of radius `radius`.
    Indicator {
        radius: f64,
    },
    /// Heterophilous ramp `r / radius` on `[0, radius]`, zero beyond.
    IncreasingCompact {
        radius: f64,
    },
    /// Topological weight `1(r ≤ radius) ⟨r⟩^{γ-β} / μ^γ`. Only the radial
    /// factor is a function of the pair; `μ` needs the ensemble, see
    /// [`eval_topological`].
    Topological {
        radius: f64,
        beta: f64,
        gamma: f64,
    },
    Constant,
    /// Piecewise-linear interpolation of `(radii, values)`, held constant
    /// outside the table.
    Tabulated {
        radii: Vec<f64>,
        values: Vec<f64>,
    },
}

impl KernelFamily {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidKernel(m));
        match self {
            KernelFamily::FatTail { theta } if !(theta.is_finite() && *theta > 0.0) => {
                bad(format!("fat-tail exponent must be positive, got {theta}"))
            }
            KernelFamily::Indicator { radius } | KernelFamily::IncreasingCompact { radius }
                if !(radius.is_finite() && *radius > 0.0) =>
            {
                bad(format!("support radius must be positive, got {radius}"))
            }
            KernelFamily::Topological { radius, beta, gamma } => {
                if !(radius.is_finite() && *radius > 0.0) {
                    return bad(format!("support radius must be positive, got {radius}"));
                }
                if !(*gamma > 0.0 && gamma < beta) {
                    return bad(format!("topological exponents need 0 < gamma < beta, got beta={beta}, gamma={gamma}"));
                }
                Ok(())
            }
            KernelFamily::Tabulated { radii, values } => {
                if radii.len() < 2 || radii.len() != values.len() {
                    return bad("tabulated profile needs at least two (radius, value) pairs".into());
                }
                if radii[0] < 0.0 || radii.windows(2).any(|w| w[1] <= w[0]) {
                    return bad("tabulated radii must be non-negative and strictly increasing".into());
                }
                if values.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
                    return bad("tabulated values must be finite and non-negative".into());
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }

    /// Unscaled profile value at radius `r ≥ 0`.
    pub fn profile(&self, r: f64) -> f64 {
        match self {
            KernelFamily::FatTail { theta } => (1.0 + r * r).powf(-0.5 * theta),
            KernelFamily::Indicator { radius } => {
                if r <= *radius {
                    1.0
                } else {
                    0.0
                }
            }
            KernelFamily::IncreasingCompact { radius } => {
                if r <= *radius {
                    r / radius
                } else {
                    0.0
                }
            }
            KernelFamily::Topological { radius, beta, gamma } => {
                if r <= *radius {
                    (1.0 + r * r).powf(-0.5 * (beta - gamma))
                } else {
                    0.0
                }
            }
            KernelFamily::Constant => 1.0,
            KernelFamily::Tabulated { radii, values } => {
                if r <= radii[0] {
                    return values[0];
                }
                let last = radii.len() - 1;
                if r >= radii[last] {
                    return values[last];
                }
                let i = radii.partition_point(|&k| k <= r) - 1;
                let t = (r - radii[i]) / (radii[i + 1] - radii[i]);
                values[i] + t * (values[i + 1] - values[i])
            }
        }
    }

    /// Radius beyond which the profile vanishes, if any.
    pub fn support_radius(&self) -> Option<f64> {
        match self {
            KernelFamily::Indicator { radius }
            | KernelFamily::IncreasingCompact { radius }
            | KernelFamily::Topological { radius, .. } => Some(*radius),
            KernelFamily::Tabulated { radii, values } => {
                if *values.last().unwrap() == 0.0 {
                    let mut r = *radii.last().unwrap();
                    for (k, v) in radii.iter().zip(values).rev() {
                        if *v != 0.0 {
                            break;
                        }
                        r = *k;
                    }
                    Some(r)
                } else {
                    None
                }
            }
            KernelFamily::FatTail { .. } | KernelFamily::Constant => None,
        }
    }

    /// Radii at which the profile has a jump or a kink.
    pub fn breakpoints(&self) -> Vec<f64> {
        match self {
            KernelFamily::Indicator { radius }
            | KernelFamily::IncreasingCompact { radius }
            | KernelFamily::Topological { radius, .. } => vec![*radius],
            KernelFamily::Tabulated { radii, .. } => radii.clone(),
            KernelFamily::FatTail { .. } | KernelFamily::Constant => Vec::new(),
        }
    }

    /// Total variation of the profile over the radial interval `[a, b]`,
    /// including any jump located at a point `r` with `a ≤ r < b`.
    pub fn variation(&self, a: f64, b: f64) -> f64 {
        if b <= a {
            return 0.0;
        }
        match self {
            KernelFamily::Constant => 0.0,
            KernelFamily::FatTail { .. } => self.profile(a) - self.profile(b),
            KernelFamily::Indicator { radius } => {
                if a <= *radius && *radius < b {
                    1.0
                } else {
                    0.0
                }
            }
            KernelFamily::IncreasingCompact { radius } | KernelFamily::Topological { radius, .. } => {
                let mut v = 0.0;
                if a < *radius {
                    v += (self.profile(radius.min(b)) - self.profile(a)).abs();
                }
                if a <= *radius && *radius < b {
                    v += self.profile(*radius);
                }
                v
            }
            KernelFamily::Tabulated { radii, .. } => {
                let mut pts = vec![a];
                pts.extend(radii.iter().copied().filter(|&k| k > a && k < b));
                pts.push(b);
                pts.windows(2).map(|w| (self.profile(w[1]) - self.profile(w[0])).abs()).sum()
            }
        }
    }
}

/// A symmetric communication kernel `φ(x, x′) = scale · profile(|x − x′|)`.
///
/// The coupling amplitude τ is a run parameter and lives in the simulation
/// configs; `scale` is the normalization constant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelSpec {
    #[serde(flatten)]
    pub family: KernelFamily,
    #[serde(default = "one")]
    pub scale: f64,
}

fn one() -> f64 {
    1.0
}

impl KernelSpec {
    pub fn new(family: KernelFamily) -> Self {
        Self { family, scale: 1.0 }
    }

    pub fn with_scale(family: KernelFamily, scale: f64) -> Self {
        Self { family, scale }
    }

    pub fn indicator(radius: f64) -> Self {
        Self::new(KernelFamily::Indicator { radius })
    }

    pub fn fat_tail(theta: f64) -> Self {
        Self::new(KernelFamily::FatTail { theta })
    }

    pub fn constant(value: f64) -> Self {
        Self::with_scale(KernelFamily::Constant, value)
    }

    /// Radial kernel value `scale · profile(r)`.
    #[inline]
    pub fn radial(&self, r: f64) -> f64 {
        self.scale * self.family.profile(r)
    }

    pub fn is_topological(&self) -> bool {
        matches!(self.family, KernelFamily::Topological { .. })
    }
}

/// Rescales `spec` so that `∫_Ω φ(x, x′) dx′ = 1`.
pub fn normalize_kernel(spec: &KernelSpec, domain: &DomainSpec) -> Result<KernelSpec> {
    spec.family.validate()?;
    domain.validate()?;
    let mass = profile_mass(&spec.family, domain)?;
    if !(mass > 0.0) {
        return Err(Error::ZeroMass);
    }
    Ok(KernelSpec { family: spec.family.clone(), scale: 1.0 / mass })
}

/// `∫_Ω φ(x, x′) dx′` for the scaled kernel.
pub fn kernel_mass(spec: &KernelSpec, domain: &DomainSpec) -> Result<f64> {
    Ok(spec.scale * profile_mass(&spec.family, domain)?)
}

/// Evaluates `φ(x, x′)` in the domain metric. For topological kernels this
/// is the radial factor alone (`μ ≡ 1`).
pub fn eval_kernel(spec: &KernelSpec, x: &[f64], x2: &[f64], domain: &DomainSpec) -> Result<f64> {
    domain.check_point(x)?;
    domain.check_point(x2)?;
    Ok(spec.radial(domain.distance(x, x2)))
}

/// Full topological weight `φ_rad(|x − x′|) / μ(x, x′)^γ`, with the crowd
/// fraction `μ` floored at `1/N`.
pub fn eval_topological(
    spec: &KernelSpec,
    positions: &[f64],
    x: &[f64],
    x2: &[f64],
    domain: &DomainSpec,
) -> Result<f64> {
    let radial = eval_kernel(spec, x, x2, domain)?;
    let KernelFamily::Topological { gamma, .. } = spec.family else {
        return Ok(radial);
    };
    if radial == 0.0 {
        return Ok(0.0);
    }
    let n = positions.len() / domain.dim;
    let mu = mu_topological(positions, x, x2, domain)?.max(1.0 / n as f64);
    Ok(radial / mu.powf(gamma))
}

/// Fraction of agents inside the communication region `C(x, x′)`: the
/// closed ball of diameter `|x − x′|` centred at the (minimum-image)
/// midpoint. In one dimension this is the closed interval between the two
/// points, the shorter arc on the torus. Endpoints count.
pub fn mu_topological(positions: &[f64], x: &[f64], x2: &[f64], domain: &DomainSpec) -> Result<f64> {
    let d = domain.dim;
    domain.check_point(x)?;
    domain.check_point(x2)?;
    if positions.is_empty() {
        return Err(Error::EmptyEnsemble);
    }
    if !positions.len().is_multiple_of(d) {
        return Err(Error::DimensionMismatch { expected: d, found: positions.len() % d });
    }
    let n = positions.len() / d;
    let mut disp = vec![0.0; d];
    domain.displacement(x, x2, &mut disp);
    let half = 0.5 * disp.iter().map(|v| v * v).sum::<f64>().sqrt();
    let mut mid: Vec<f64> = x.iter().zip(&disp).map(|(a, v)| a + 0.5 * v).collect();
    domain.wrap(&mut mid);
    // The midpoint of x→x′ and of x′→x can differ by one rounding; the
    // tolerance absorbs it so μ stays symmetric.
    let tol = 1e-12 * half.max(1.0);
    let count = positions.chunks_exact(d).filter(|z| domain.distance(z, &mid) <= half + tol).count();
    Ok(count as f64 / n as f64)
}

fn unit_sphere_area(dim: usize) -> f64 {
    match dim {
        1 => 2.0,
        2 => std::f64::consts::TAU,
        _ => 2.0 * std::f64::consts::TAU,
    }
}

/// Integral of the unscaled profile over the domain.
pub fn profile_mass(family: &KernelFamily, domain: &DomainSpec) -> Result<f64> {
    family.validate()?;
    let dim = domain.dim;
    match domain.kind {
        DomainKind::Torus { period } => Ok(cube_integral(dim, 0.5 * period, &family.breakpoints(), |x| {
            family.profile(x.iter().map(|v| v * v).sum::<f64>().sqrt())
        })),
        DomainKind::Free => {
            let area = unit_sphere_area(dim);
            if let Some(support) = family.support_radius() {
                let q = Composite::new(10, 32);
                return Ok(area
                    * q.integrate(0.0, support, &family.breakpoints(), |r| {
                        family.profile(r) * r.powi(dim as i32 - 1)
                    }));
            }
            match family {
                KernelFamily::FatTail { theta } if *theta > dim as f64 => {
                    // ∫₀^∞ (1+r²)^{-θ/2} r^{d-1} dr = ½ B(d/2, (θ-d)/2)
                    let a = 0.5 * dim as f64;
                    let b = 0.5 * (theta - dim as f64);
                    Ok(area * 0.5 * (ln_gamma(a) + ln_gamma(b) - ln_gamma(a + b)).exp())
                }
                _ => Err(Error::NonIntegrable(format!("free space R^{dim}"))),
            }
        }
    }
}

/// Integrates `f` over the cube `[-half, half]^dim`, splitting it into `2·dim`
/// pyramids with apex at the origin so that radial breakpoints become
/// breakpoints of the one-dimensional inner integral.
pub(crate) fn cube_integral<F: Fn(&[f64]) -> f64>(dim: usize, half: f64, radial_breaks: &[f64], f: F) -> f64 {
    let inner = Composite::new(10, 8);
    match dim {
        1 => {
            let g = |s: f64| f(&[s]) + f(&[-s]);
            inner.integrate(0.0, half, radial_breaks, g)
        }
        2 => {
            let outer = Composite::new(10, 24);
            // breakpoints in the face coordinate where a break radius leaves the inscribed disc
            let abreaks: Vec<f64> = radial_breaks
                .iter()
                .filter(|&&r| r > half)
                .map(|&r| ((r / half).powi(2) - 1.0).sqrt())
                .filter(|&a| a < 1.0)
                .flat_map(|a| [-a, a])
                .collect();
            outer.integrate(-1.0, 1.0, &abreaks, |a| {
                let stretch = half * (1.0 + a * a).sqrt();
                let sbreaks: Vec<f64> = radial_breaks.iter().map(|r| r / stretch).collect();
                inner.integrate(0.0, 1.0, &sbreaks, |s| {
                    let u = s * half * a;
                    let v = s * half;
                    let w = half * half * s;
                    w * (f(&[u, v]) + f(&[u, -v]) + f(&[v, u]) + f(&[-v, u]))
                })
            })
        }
        _ => {
            let outer = Composite::new(10, 12);
            outer.integrate(-1.0, 1.0, &[], |a| {
                outer.integrate(-1.0, 1.0, &[], |b| {
                    let stretch = half * (1.0 + a * a + b * b).sqrt();
                    let sbreaks: Vec<f64> = radial_breaks.iter().map(|r| r / stretch).collect();
                    inner.integrate(0.0, 1.0, &sbreaks, |s| {
                        let (p, q, z) = (s * half * a, s * half * b, s * half);
                        let w = half.powi(3) * s * s;
                        w * (f(&[p, q, z])
                            + f(&[p, q, -z])
                            + f(&[p, z, q])
                            + f(&[p, -z, q])
                            + f(&[z, p, q])
                            + f(&[-z, p, q]))
                    })
                })
            })
        }
    }
}
