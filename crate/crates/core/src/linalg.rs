//! Dense symmetric eigensolvers.
//!
//! * [`jacobi_eigen`]: cyclic Jacobi rotations. Slow but unconditionally
//!   accurate; the reference path for small matrices.
//! * [`symmetric_eigen`]: Householder tridiagonalization followed by implicit
//!   QL, for dense matrices too large for Jacobi.
//! * [`second_smallest`]: the Fiedler pair of a PSD matrix with a known
//!   null vector, switching between the above and deflated inverse
//!   iteration by size.

use crate::error::{Error, Result};

/// Row-major square matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    n: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    pub fn zeros(n: usize) -> Self {
        Self { n, data: vec![0.0; n * n] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m.data[i * n + i] = 1.0;
        }
        m
    }

    pub fn from_fn<F: FnMut(usize, usize) -> f64>(n: usize, mut f: F) -> Self {
        let mut data = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                data.push(f(i, j));
            }
        }
        Self { n, data }
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Self {
        let n = rows.len();
        assert!(rows.iter().all(|r| r.len() == n), "matrix must be square");
        Self { n, data: rows.concat() }
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.n + j] = v;
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.n];
        self.matvec_into(x, &mut y);
        y
    }

    pub fn matvec_into(&self, x: &[f64], y: &mut [f64]) {
        for (i, yi) in y.iter_mut().enumerate() {
            *yi = self.row(i).iter().zip(x).map(|(a, b)| a * b).sum();
        }
    }

    pub fn is_symmetric(&self) -> bool {
        (0..self.n).all(|i| (0..i).all(|j| self.get(i, j) == self.get(j, i)))
    }

    pub fn scale(&mut self, s: f64) {
        self.data.iter_mut().for_each(|v| *v *= s);
    }

    /// Infinity norm, an upper bound on the spectral radius.
    pub fn norm_inf(&self) -> f64 {
        (0..self.n).map(|i| self.row(i).iter().map(|v| v.abs()).sum::<f64>()).fold(0.0, f64::max)
    }

    pub fn frobenius(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    /// Quadratic form `⟨A x, x⟩`.
    pub fn quadratic_form(&self, x: &[f64]) -> f64 {
        dot(&self.matvec(x), x)
    }
}

/// Eigen-decomposition with eigenvalues ascending; `vectors` column `k`
/// pairs with `values[k]`.
#[derive(Debug, Clone)]
pub struct Eigen {
    pub values: Vec<f64>,
    pub vectors: DenseMatrix,
}

impl Eigen {
    pub fn vector(&self, k: usize) -> Vec<f64> {
        (0..self.vectors.dim()).map(|i| self.vectors.get(i, k)).collect()
    }

    fn sorted(mut values: Vec<f64>, vectors: DenseMatrix) -> Self {
        let n = values.len();
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
        let mut v = DenseMatrix::zeros(n);
        for (new, &old) in order.iter().enumerate() {
            for i in 0..n {
                v.set(i, new, vectors.get(i, old));
            }
        }
        values = order.iter().map(|&k| values[k]).collect();
        Self { values, vectors: v }
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// `‖A v − λ v‖₂` for a unit vector `v`.
pub fn eigen_residual(a: &DenseMatrix, value: f64, v: &[f64]) -> f64 {
    let av = a.matvec(v);
    av.iter().zip(v).map(|(x, y)| (x - value * y).powi(2)).sum::<f64>().sqrt()
}

/// Cyclic Jacobi eigensolver for symmetric matrices.
pub fn jacobi_eigen(a: &DenseMatrix) -> Result<Eigen> {
    const MAX_SWEEPS: usize = 100;
    let n = a.dim();
    let mut m = a.clone();
    let mut v = DenseMatrix::identity(n);
    let scale = a.frobenius();
    if n <= 1 || scale == 0.0 {
        let values = (0..n).map(|i| a.get(i, i)).collect();
        return Ok(Eigen { values, vectors: v });
    }
    for sweep in 0..MAX_SWEEPS {
        let off: f64 = (0..n).map(|i| (0..i).map(|j| m.get(i, j).powi(2)).sum::<f64>()).sum::<f64>().sqrt();
        if off <= 1e-15 * scale {
            break;
        }
        if sweep == MAX_SWEEPS - 1 {
            return Err(Error::EigenNoConvergence { iterations: MAX_SWEEPS, residual: off });
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = m.get(p, q);
                if apq == 0.0 {
                    continue;
                }
                let app = m.get(p, p);
                let aqq = m.get(q, q);
                let theta = 0.5 * (aqq - app) / apq;
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let mkp = m.get(k, p);
                    let mkq = m.get(k, q);
                    m.set(k, p, c * mkp - s * mkq);
                    m.set(k, q, s * mkp + c * mkq);
                }
                for k in 0..n {
                    let mpk = m.get(p, k);
                    let mqk = m.get(q, k);
                    m.set(p, k, c * mpk - s * mqk);
                    m.set(q, k, s * mpk + c * mqk);
                }
                m.set(p, q, 0.0);
                m.set(q, p, 0.0);
                for k in 0..n {
                    let vkp = v.get(k, p);
                    let vkq = v.get(k, q);
                    v.set(k, p, c * vkp - s * vkq);
                    v.set(k, q, s * vkp + c * vkq);
                }
            }
        }
    }
    let values = (0..n).map(|i| m.get(i, i)).collect();
    Ok(Eigen::sorted(values, v))
}

/// Householder reduction to tridiagonal form followed by the implicit QL
/// algorithm (EISPACK tred2/tql2).
pub fn symmetric_eigen(a: &DenseMatrix) -> Result<Eigen> {
    let n = a.dim();
    if n == 0 {
        return Ok(Eigen { values: vec![], vectors: DenseMatrix::zeros(0) });
    }
    // column-major working copy, z[j][i] = V(i, j)
    let mut v: Vec<Vec<f64>> = (0..n).map(|i| (0..n).map(|j| a.get(i, j)).collect()).collect();
    let mut d = vec![0.0; n];
    let mut e = vec![0.0; n];
    tred2(&mut v, &mut d, &mut e);
    tql2(&mut v, &mut d, &mut e)?;
    let vectors = DenseMatrix::from_fn(n, |i, j| v[i][j]);
    Ok(Eigen::sorted(d, vectors))
}

fn tred2(v: &mut [Vec<f64>], d: &mut [f64], e: &mut [f64]) {
    let n = d.len();
    if n == 0 {
        return;
    }
    d.copy_from_slice(&v[n - 1][..n]);
    for i in (1..n).rev() {
        let mut scale = 0.0;
        let mut h = 0.0;
        for k in 0..i {
            scale += d[k].abs();
        }
        if scale == 0.0 {
            e[i] = d[i - 1];
            for j in 0..i {
                d[j] = v[i - 1][j];
                v[i][j] = 0.0;
                v[j][i] = 0.0;
            }
        } else {
            for k in 0..i {
                d[k] /= scale;
                h += d[k] * d[k];
            }
            let mut f = d[i - 1];
            let mut g = h.sqrt();
            if f > 0.0 {
                g = -g;
            }
            e[i] = scale * g;
            h -= f * g;
            d[i - 1] = f - g;
            for j in 0..i {
                e[j] = 0.0;
            }
            for j in 0..i {
                f = d[j];
                v[j][i] = f;
                g = e[j] + v[j][j] * f;
                for k in j + 1..i {
                    g += v[k][j] * d[k];
                    e[k] += v[k][j] * f;
                }
                e[j] = g;
            }
            f = 0.0;
            for j in 0..i {
                e[j] /= h;
                f += e[j] * d[j];
            }
            let hh = f / (h + h);
            for j in 0..i {
                e[j] -= hh * d[j];
            }
            for j in 0..i {
                f = d[j];
                g = e[j];
                for k in j..i {
                    v[k][j] -= f * e[k] + g * d[k];
                }
                d[j] = v[i - 1][j];
                v[i][j] = 0.0;
            }
        }
        d[i] = h;
    }
    for i in 0..n - 1 {
        v[n - 1][i] = v[i][i];
        v[i][i] = 1.0;
        let h = d[i + 1];
        if h != 0.0 {
            for k in 0..=i {
                d[k] = v[k][i + 1] / h;
            }
            for j in 0..=i {
                let mut g = 0.0;
                for k in 0..=i {
                    g += v[k][i + 1] * v[k][j];
                }
                for k in 0..=i {
                    v[k][j] -= g * d[k];
                }
            }
        }
        for k in 0..=i {
            v[k][i + 1] = 0.0;
        }
    }
    for j in 0..n {
        d[j] = v[n - 1][j];
        v[n - 1][j] = 0.0;
    }
    v[n - 1][n - 1] = 1.0;
    e[0] = 0.0;
}

fn tql2(v: &mut [Vec<f64>], d: &mut [f64], e: &mut [f64]) -> Result<()> {
    let n = d.len();
    for i in 1..n {
        e[i - 1] = e[i];
    }
    e[n - 1] = 0.0;
    let mut f = 0.0;
    let mut tst1: f64 = 0.0;
    let eps = f64::EPSILON;
    for l in 0..n {
        tst1 = tst1.max(d[l].abs() + e[l].abs());
        let mut m = l;
        while m < n {
            if e[m].abs() <= eps * tst1 {
                break;
            }
            m += 1;
        }
        if m == n {
            m = n - 1;
        }
        if m > l {
            let mut iter = 0;
            loop {
                iter += 1;
                if iter > 200 {
                    return Err(Error::EigenNoConvergence { iterations: iter, residual: e[l].abs() });
                }
                let mut g = d[l];
                let mut p = (d[l + 1] - g) / (2.0 * e[l]);
                let mut r = p.hypot(1.0);
                if p < 0.0 {
                    r = -r;
                }
                d[l] = e[l] / (p + r);
                d[l + 1] = e[l] * (p + r);
                let dl1 = d[l + 1];
                let mut h = g - d[l];
                for di in d.iter_mut().take(n).skip(l + 2) {
                    *di -= h;
                }
                f += h;
                p = d[m];
                let mut c = 1.0;
                let mut c2 = c;
                let mut c3 = c;
                let el1 = e[l + 1];
                let mut s = 0.0;
                let mut s2 = 0.0;
                for i in (l..m).rev() {
                    c3 = c2;
                    c2 = c;
                    s2 = s;
                    g = c * e[i];
                    h = c * p;
                    r = p.hypot(e[i]);
                    e[i + 1] = s * r;
                    s = e[i] / r;
                    c = p / r;
                    p = c * d[i] - s * g;
                    d[i + 1] = h + s * (c * g + s * d[i]);
                    for row in v.iter_mut() {
                        h = row[i + 1];
                        row[i + 1] = s * row[i] + c * h;
                        row[i] = c * row[i] - s * h;
                    }
                }
                p = -s * s2 * c3 * el1 * e[l] / dl1;
                e[l] = s * p;
                d[l] = c * p;
                if e[l].abs() <= eps * tst1 {
                    break;
                }
            }
        }
        d[l] += f;
        e[l] = 0.0;
    }
    Ok(())
}

/// Second-smallest eigenpair of a symmetric PSD matrix whose null vector
/// is known.
#[derive(Debug, Clone)]
pub struct LowEigenpair {
    pub value: f64,
    pub vector: Vec<f64>,
    pub residual: f64,
}

/// Which dense/iterative path [`second_smallest`] uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EigenMethod {
    Jacobi,
    Tridiagonal,
    InverseIteration,
}

impl EigenMethod {
    /// Jacobi up to 256, tridiagonal QL up to 4096, iterative above.
    pub fn for_size(n: usize) -> Self {
        if n <= 256 {
            EigenMethod::Jacobi
        } else if n <= 4096 {
            EigenMethod::Tridiagonal
        } else {
            EigenMethod::InverseIteration
        }
    }
}

/// λ₂ of a PSD matrix `a` with `a · null ≈ 0`, via the deflated matrix
/// `a + s q qᵀ` (`q = null / ‖null‖`, `s` above the spectral radius), whose
/// smallest eigenpair is the Fiedler pair of `a`.
pub fn second_smallest(a: &DenseMatrix, null: &[f64], method: EigenMethod) -> Result<LowEigenpair> {
    let n = a.dim();
    assert_eq!(null.len(), n);
    if n < 2 {
        return Ok(LowEigenpair { value: 0.0, vector: vec![0.0; n], residual: 0.0 });
    }
    let nn = norm(null);
    let q: Vec<f64> = if nn > 0.0 { null.iter().map(|v| v / nn).collect() } else { vec![0.0; n] };
    let shift = a.norm_inf() + 1.0;
    match method {
        EigenMethod::Jacobi | EigenMethod::Tridiagonal => {
            let deflated = DenseMatrix::from_fn(n, |i, j| a.get(i, j) + shift * q[i] * q[j]);
            let eig =
                if method == EigenMethod::Jacobi { jacobi_eigen(&deflated)? } else { symmetric_eigen(&deflated)? };
            let value = eig.values[0];
            let vector = eig.vector(0);
            let residual = eigen_residual(a, value, &vector);
            Ok(LowEigenpair { value, vector, residual })
        }
        EigenMethod::InverseIteration => {
            let scale = a.norm_inf();
            if scale == 0.0 {
                let mut vector: Vec<f64> = (0..n).map(|i| if i == 0 { 1.0 } else { 0.0 }).collect();
                project_out(&mut vector, &q);
                let nv = norm(&vector);
                vector.iter_mut().for_each(|v| *v /= nv);
                return Ok(LowEigenpair { value: 0.0, vector, residual: 0.0 });
            }
            inverse_iteration(a, &q, 1e-10 * scale)
        }
    }
}

fn project_out(x: &mut [f64], q: &[f64]) {
    let c = dot(x, q);
    x.iter_mut().zip(q).for_each(|(xi, qi)| *xi -= c * qi);
}

/// Block inverse iteration on `q⊥` with conjugate-gradient inner solves of
/// `(A + μ I) y = x` and a Rayleigh–Ritz step, which keeps convergence fast
/// when λ₂ is (nearly) repeated. The tiny shift `μ` keeps the solves
/// definite when the graph is disconnected.
fn inverse_iteration(a: &DenseMatrix, q: &[f64], tol: f64) -> Result<LowEigenpair> {
    const MAX_OUTER: usize = 300;
    let n = a.dim();
    let b = 4.min(n - 1);
    let mu = 1e-9 * a.norm_inf();
    // deterministic start block, not aligned with low modes by accident
    let mut block: Vec<Vec<f64>> = (0..b)
        .map(|c| (0..n).map(|i| ((i as f64 + 1.0) * (0.618_033_988_749_895 + 0.1 * c as f64)).fract() - 0.5).collect())
        .collect();
    orthonormalize(&mut block, q);
    let mut best = LowEigenpair { value: f64::NAN, vector: block[0].clone(), residual: f64::INFINITY };
    for _ in 0..MAX_OUTER {
        let mut next: Vec<Vec<f64>> = block.iter().map(|x| conjugate_gradient(a, mu, x, q, 1e-14, 10 * n)).collect();
        orthonormalize(&mut next, q);
        let k = next.len();
        if k == 0 {
            break;
        }
        let av: Vec<Vec<f64>> = next.iter().map(|y| a.matvec(y)).collect();
        let h = DenseMatrix::from_fn(k, |i, j| 0.5 * (dot(&next[i], &av[j]) + dot(&next[j], &av[i])));
        let ritz = jacobi_eigen(&h)?;
        block = (0..k)
            .map(|c| {
                let mut x = vec![0.0; n];
                for (r, y) in next.iter().enumerate() {
                    let w = ritz.vectors.get(r, c);
                    x.iter_mut().zip(y).for_each(|(xi, yi)| *xi += w * yi);
                }
                x
            })
            .collect();
        let value = ritz.values[0];
        let residual = eigen_residual(a, value, &block[0]);
        best = LowEigenpair { value, vector: block[0].clone(), residual };
        if residual <= tol {
            return Ok(best);
        }
    }
    Err(Error::EigenNoConvergence { iterations: MAX_OUTER, residual: best.residual })
}

/// Modified Gram–Schmidt against `q` and each other; drops dependent columns.
fn orthonormalize(block: &mut Vec<Vec<f64>>, q: &[f64]) {
    let mut out: Vec<Vec<f64>> = Vec::with_capacity(block.len());
    for mut x in block.drain(..) {
        for _ in 0..2 {
            project_out(&mut x, q);
            for y in &out {
                project_out(&mut x, y);
            }
        }
        let nx = norm(&x);
        if nx > 1e-300 && nx.is_finite() {
            x.iter_mut().for_each(|v| *v /= nx);
            out.push(x);
        }
    }
    *block = out;
}

fn conjugate_gradient(a: &DenseMatrix, mu: f64, b: &[f64], q: &[f64], rtol: f64, max_iter: usize) -> Vec<f64> {
    let n = b.len();
    let mut x = vec![0.0; n];
    let mut r = b.to_vec();
    project_out(&mut r, q);
    let mut p = r.clone();
    let mut rr = dot(&r, &r);
    let target = rtol * rtol * rr;
    let mut ap = vec![0.0; n];
    for _ in 0..max_iter {
        if rr <= target {
            break;
        }
        a.matvec_into(&p, &mut ap);
        ap.iter_mut().zip(&p).for_each(|(v, pi)| *v += mu * pi);
        project_out(&mut ap, q);
        let alpha = rr / dot(&p, &ap);
        x.iter_mut().zip(&p).for_each(|(xi, pi)| *xi += alpha * pi);
        r.iter_mut().zip(&ap).for_each(|(ri, v)| *ri -= alpha * v);
        let rr_new = dot(&r, &r);
        let beta = rr_new / rr;
        p.iter_mut().zip(&r).for_each(|(pi, ri)| *pi = ri + beta * *pi);
        rr = rr_new;
    }
    x
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_symmetric(n: usize, seed: u64) -> DenseMatrix {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut m = DenseMatrix::zeros(n);
        for i in 0..n {
            for j in 0..=i {
                let v = rng.gen_range(-1.0..1.0);
                m.set(i, j, v);
                m.set(j, i, v);
            }
        }
        m
    }

    #[test]
    fn jacobi_and_ql_agree_on_random_matrices() {
        for (n, seed) in [(1, 1), (2, 2), (7, 3), (40, 4), (64, 5)] {
            let a = random_symmetric(n, seed);
            let j = jacobi_eigen(&a).unwrap();
            let t = symmetric_eigen(&a).unwrap();
            for (x, y) in j.values.iter().zip(&t.values) {
                assert!((x - y).abs() < 1e-12, "n={n}: {x} vs {y}");
            }
            for k in 0..n {
                assert!(eigen_residual(&a, j.values[k], &j.vector(k)) < 1e-12);
                assert!(eigen_residual(&a, t.values[k], &t.vector(k)) < 1e-12);
            }
        }
    }

    #[test]
    fn known_spectra() {
        // path graph Laplacian, N = 3: eigenvalues {0, 1, 3}
        let l = DenseMatrix::from_rows(&[vec![1.0, -1.0, 0.0], vec![-1.0, 2.0, -1.0], vec![0.0, -1.0, 1.0]]);
        let e = jacobi_eigen(&l).unwrap();
        for (v, want) in e.values.iter().zip([0.0, 1.0, 3.0]) {
            assert!((v - want).abs() < 1e-14);
        }
        let e = symmetric_eigen(&l).unwrap();
        for (v, want) in e.values.iter().zip([0.0, 1.0, 3.0]) {
            assert!((v - want).abs() < 1e-14);
        }
    }

    #[test]
    fn second_smallest_paths_agree() {
        // cycle graph on 40 nodes plus a chord; connected, λ₂ simple
        let n = 40;
        let mut adj = DenseMatrix::zeros(n);
        for i in 0..n {
            let j = (i + 1) % n;
            adj.set(i, j, 1.0);
            adj.set(j, i, 1.0);
        }
        adj.set(0, 20, 0.3);
        adj.set(20, 0, 0.3);
        let lap = DenseMatrix::from_fn(n, |i, j| if i == j { adj.row(i).iter().sum() } else { -adj.get(i, j) });
        let ones = vec![1.0; n];
        let a = second_smallest(&lap, &ones, EigenMethod::Jacobi).unwrap();
        let b = second_smallest(&lap, &ones, EigenMethod::Tridiagonal).unwrap();
        let c = second_smallest(&lap, &ones, EigenMethod::InverseIteration).unwrap();
        assert!((a.value - b.value).abs() < 1e-12);
        assert!((a.value - c.value).abs() < 1e-9, "{} vs {}", a.value, c.value);
        assert!(dot(&a.vector, &ones).abs() < 1e-10);
        assert!(a.residual < 1e-10 && c.residual < 1e-9);
    }
}
