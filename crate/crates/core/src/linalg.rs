//! Symmetric tridiagonal eigensolvers.
//!
//! Two independent routes to the low end of the spectrum:
//! Sturm-sequence bisection followed by inverse iteration (the reference),
//! and shift-invert block subspace iteration with a Rayleigh–Ritz step.

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};

/// Symmetric tridiagonal matrix with diagonal `diag` and off-diagonal `off`
/// (`off[i]` couples rows `i` and `i + 1`).
#[derive(Debug, Clone, PartialEq)]
pub struct SymTridiagonal {
    diag: Vec<f64>,
    off: Vec<f64>,
}

/// One eigenpair in the matrix's own coordinates; `vector` has unit
/// Euclidean norm.
#[derive(Debug, Clone, PartialEq)]
pub struct TriEigenPair {
    pub value: f64,
    pub vector: Vec<f64>,
    pub residual: f64,
}

impl SymTridiagonal {
    pub fn new(diag: Vec<f64>, off: Vec<f64>) -> Self {
        assert!(!diag.is_empty(), "empty tridiagonal matrix");
        assert_eq!(off.len() + 1, diag.len(), "off-diagonal length mismatch");
        Self { diag, off }
    }

    pub fn dim(&self) -> usize {
        self.diag.len()
    }

    pub fn diag(&self) -> &[f64] {
        &self.diag
    }

    pub fn off(&self) -> &[f64] {
        &self.off
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let n = self.dim();
        let mut y = vec![0.0; n];
        for i in 0..n {
            let mut acc = self.diag[i] * x[i];
            if i > 0 {
                acc += self.off[i - 1] * x[i - 1];
            }
            if i + 1 < n {
                acc += self.off[i] * x[i + 1];
            }
            y[i] = acc;
        }
        y
    }

    /// Gershgorin enclosure of the spectrum.
    pub fn gershgorin(&self) -> (f64, f64) {
        let n = self.dim();
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in 0..n {
            let mut r = 0.0;
            if i > 0 {
                r += self.off[i - 1].abs();
            }
            if i + 1 < n {
                r += self.off[i].abs();
            }
            lo = lo.min(self.diag[i] - r);
            hi = hi.max(self.diag[i] + r);
        }
        (lo, hi)
    }

    fn one_norm(&self) -> f64 {
        let (lo, hi) = self.gershgorin();
        lo.abs().max(hi.abs()).max(f64::MIN_POSITIVE)
    }

    /// Number of eigenvalues strictly below `x`.
    pub fn sturm_count(&self, x: f64) -> usize {
        let pivmin = f64::MIN_POSITIVE.sqrt() * self.one_norm().max(1.0);
        let mut count = 0;
        let mut q = self.diag[0] - x;
        if q.abs() < pivmin {
            q = -pivmin;
        }
        if q < 0.0 {
            count += 1;
        }
        for i in 1..self.dim() {
            let e = self.off[i - 1];
            q = self.diag[i] - x - e * e / q;
            if q.abs() < pivmin {
                q = -pivmin;
            }
            if q < 0.0 {
                count += 1;
            }
        }
        count
    }

    /// The `index`-th smallest eigenvalue (0-based) by bisection.
    pub fn eigenvalue_bisect(&self, index: usize) -> f64 {
        assert!(index < self.dim());
        let (mut lo, mut hi) = self.gershgorin();
        let pad = 1e-14 * self.one_norm() + f64::MIN_POSITIVE;
        lo -= pad;
        hi += pad;
        loop {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if hi - lo <= 2.0 * f64::EPSILON * lo.abs().max(hi.abs()) {
                break;
            }
            if self.sturm_count(mid) > index {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        0.5 * (lo + hi)
    }

    /// Eigenvector for a (bisection-accurate) eigenvalue by inverse iteration,
    /// orthogonalized against `cluster`.
    fn inverse_iteration(&self, value: f64, cluster: &[&[f64]], seed: u64) -> Vec<f64> {
        let n = self.dim();
        let lu = ShiftedLu::factor(self, value, f64::EPSILON * self.one_norm());
        let mut x = start_vector(n, seed);
        orthonormalize(&mut x, cluster);
        for _ in 0..6 {
            let mut y = lu.solve(&x);
            orthonormalize(&mut y, cluster);
            x = y;
        }
        x
    }

    fn residual(&self, value: f64, v: &[f64]) -> f64 {
        self.apply(v)
            .iter()
            .zip(v)
            .map(|(hv, x)| {
                let r = hv - value * x;
                r * r
            })
            .sum::<f64>()
            .sqrt()
    }

    fn rayleigh(&self, v: &[f64]) -> f64 {
        let hv = self.apply(v);
        hv.iter().zip(v).map(|(a, b)| a * b).sum::<f64>() / dot(v, v)
    }

    /// `k` lowest eigenpairs, ascending, by bisection and inverse iteration.
    pub fn lowest_dense(&self, k: usize) -> Result<Vec<TriEigenPair>> {
        let n = self.dim();
        if k == 0 || k > n {
            return Err(Error::KExceedsGrid { k, n });
        }
        let values: Vec<f64> = (0..k).map(|j| self.eigenvalue_bisect(j)).collect();
        let norm = self.one_norm();
        let cluster_tol = 1e-3 * norm;
        let sep = 10.0 * f64::EPSILON * norm;
        let mut vectors: Vec<Vec<f64>> = Vec::with_capacity(k);
        let mut cluster_start = 0;
        let mut prev_shift = f64::NEG_INFINITY;
        for j in 0..k {
            if j > 0 && values[j] - values[j - 1] > cluster_tol {
                cluster_start = j;
            }
            let mut shift = values[j];
            if j > cluster_start && shift - prev_shift < sep {
                shift = prev_shift + sep;
            }
            prev_shift = shift;
            let cluster: Vec<&[f64]> = vectors[cluster_start..j]
                .iter()
                .map(|v| v.as_slice())
                .collect();
            let v = self.inverse_iteration(shift, &cluster, j as u64 + 1);
            vectors.push(v);
        }
        Ok(values
            .into_iter()
            .zip(vectors)
            .map(|(value, vector)| {
                let residual = self.residual(value, &vector);
                TriEigenPair {
                    value,
                    vector,
                    residual,
                }
            })
            .collect())
    }

    /// `k` lowest eigenpairs by shift-invert subspace iteration.
    ///
    /// The shift sits at the Gershgorin lower bound, so `(T - σ)^{-1}` is
    /// positive definite and its dominant subspace is the low spectrum.
    pub fn lowest_iterative(
        &self,
        k: usize,
        tol: f64,
        max_iter: usize,
    ) -> Result<Vec<TriEigenPair>> {
        let n = self.dim();
        if k == 0 || k > n {
            return Err(Error::KExceedsGrid { k, n });
        }
        let block = (k + 4).min(n);
        let (lo, _) = self.gershgorin();
        let shift = lo - 1e-3 * self.one_norm().max(1.0);
        let lu = ShiftedLu::factor(self, shift, 0.0);

        let mut basis: Vec<Vec<f64>> = (0..block)
            .map(|j| start_vector(n, 1000 + j as u64))
            .collect();
        gram_schmidt(&mut basis);
        let mut last = Vec::new();
        for _ in 0..max_iter {
            let mut next: Vec<Vec<f64>> = basis.iter().map(|b| lu.solve(b)).collect();
            gram_schmidt(&mut next);
            let ritz = self.rayleigh_ritz(&next);
            basis = ritz.iter().map(|p| p.vector.clone()).collect();
            let done = ritz[..k]
                .iter()
                .all(|p| p.residual <= tol * p.value.abs().max(1.0));
            last = ritz;
            if done {
                last.truncate(k);
                return Ok(last);
            }
        }
        let worst = last[..k].iter().map(|p| p.residual).fold(0.0, f64::max);
        Err(Error::Eigensolver(format!(
            "subspace iteration did not reach tolerance {tol:e} in {max_iter} sweeps (residual {worst:e})"
        )))
    }

    fn rayleigh_ritz(&self, basis: &[Vec<f64>]) -> Vec<TriEigenPair> {
        let m = basis.len();
        let images: Vec<Vec<f64>> = basis.iter().map(|b| self.apply(b)).collect();
        let proj = DMatrix::from_fn(m, m, |i, j| {
            0.5 * (dot(&basis[i], &images[j]) + dot(&basis[j], &images[i]))
        });
        let eig = SymmetricEigen::new(proj);
        let mut order: Vec<usize> = (0..m).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
        order
            .into_iter()
            .map(|c| {
                let mut v = vec![0.0; self.dim()];
                for (i, b) in basis.iter().enumerate() {
                    let coef = eig.eigenvectors[(i, c)];
                    for (vi, bi) in v.iter_mut().zip(b) {
                        *vi += coef * bi;
                    }
                }
                let nrm = dot(&v, &v).sqrt();
                v.iter_mut().for_each(|x| *x /= nrm);
                let value = self.rayleigh(&v);
                let residual = self.residual(value, &v);
                TriEigenPair {
                    value,
                    vector: v,
                    residual,
                }
            })
            .collect()
    }
}

/// LU factorization of `T - σI` with partial pivoting (two superdiagonals).
struct ShiftedLu {
    d: Vec<f64>,
    du: Vec<f64>,
    du2: Vec<f64>,
    dl: Vec<f64>,
    swapped: Vec<bool>,
}

impl ShiftedLu {
    fn factor(t: &SymTridiagonal, shift: f64, tiny: f64) -> Self {
        let n = t.dim();
        let mut d: Vec<f64> = t.diag.iter().map(|x| x - shift).collect();
        let mut du = t.off.clone();
        let mut dl = t.off.clone();
        let mut du2 = vec![0.0; n.saturating_sub(2)];
        let mut swapped = vec![false; n.saturating_sub(1)];
        for i in 0..n.saturating_sub(1) {
            if d[i].abs() >= dl[i].abs() {
                if d[i] == 0.0 {
                    d[i] = tiny.max(f64::MIN_POSITIVE);
                }
                let fact = dl[i] / d[i];
                dl[i] = fact;
                d[i + 1] -= fact * du[i];
            } else {
                let fact = d[i] / dl[i];
                d[i] = dl[i];
                dl[i] = fact;
                let temp = du[i];
                du[i] = d[i + 1];
                d[i + 1] = temp - fact * d[i + 1];
                if i + 2 < n {
                    du2[i] = du[i + 1];
                    du[i + 1] = -fact * du[i + 1];
                }
                swapped[i] = true;
            }
        }
        if d[n - 1] == 0.0 {
            d[n - 1] = tiny.max(f64::MIN_POSITIVE);
        }
        for di in d.iter_mut() {
            if di.abs() < tiny {
                *di = tiny.copysign(*di);
            }
        }
        Self {
            d,
            du,
            du2,
            dl,
            swapped,
        }
    }

    fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.d.len();
        let mut x = b.to_vec();
        for i in 0..n.saturating_sub(1) {
            if self.swapped[i] {
                let temp = x[i];
                x[i] = x[i + 1];
                x[i + 1] = temp - self.dl[i] * x[i];
            } else {
                x[i + 1] -= self.dl[i] * x[i];
            }
        }
        x[n - 1] /= self.d[n - 1];
        if n > 1 {
            x[n - 2] = (x[n - 2] - self.du[n - 2] * x[n - 1]) / self.d[n - 2];
        }
        for i in (0..n.saturating_sub(2)).rev() {
            x[i] = (x[i] - self.du[i] * x[i + 1] - self.du2[i] * x[i + 2]) / self.d[i];
        }
        x
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Deterministic pseudo-random start vector in [-1, 1] (splitmix64).
fn start_vector(n: usize, seed: u64) -> Vec<f64> {
    let mut state = seed.wrapping_mul(0x9E37_79B9_7F4A_7C15) ^ 0xD1B5_4A32_D192_ED03;
    (0..n)
        .map(|_| {
            state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
            let mut z = state;
            z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
            z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
            z ^= z >> 31;
            (z >> 11) as f64 / (1u64 << 53) as f64 * 2.0 - 1.0
        })
        .collect()
}

fn orthonormalize(x: &mut [f64], against: &[&[f64]]) {
    for _ in 0..2 {
        for q in against {
            let c = dot(x, q);
            x.iter_mut().zip(q.iter()).for_each(|(a, b)| *a -= c * b);
        }
    }
    let nrm = dot(x, x).sqrt();
    if nrm > 0.0 {
        x.iter_mut().for_each(|a| *a /= nrm);
    }
}

fn gram_schmidt(basis: &mut [Vec<f64>]) {
    for j in 0..basis.len() {
        let (done, rest) = basis.split_at_mut(j);
        let refs: Vec<&[f64]> = done.iter().map(|v| v.as_slice()).collect();
        orthonormalize(&mut rest[0], &refs);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Dense Jacobi-free oracle: nalgebra's symmetric eigensolver on the full matrix.
    fn dense_oracle(t: &SymTridiagonal) -> Vec<f64> {
        let n = t.dim();
        let m = DMatrix::from_fn(n, n, |i, j| {
            if i == j {
                t.diag[i]
            } else if i + 1 == j {
                t.off[i]
            } else if j + 1 == i {
                t.off[j]
            } else {
                0.0
            }
        });
        let mut v: Vec<f64> = SymmetricEigen::new(m).eigenvalues.iter().copied().collect();
        v.sort_by(f64::total_cmp);
        v
    }

    fn laplacian(n: usize) -> SymTridiagonal {
        SymTridiagonal::new(vec![2.0; n], vec![-1.0; n - 1])
    }

    #[test]
    fn laplacian_closed_form() {
        let n = 50;
        let t = laplacian(n);
        let pairs = t.lowest_dense(4).unwrap();
        for (j, p) in pairs.iter().enumerate() {
            let theta = (j + 1) as f64 * std::f64::consts::PI / (n + 1) as f64;
            let exact = 2.0 - 2.0 * theta.cos();
            assert!(
                (p.value - exact).abs() < 1e-13,
                "{j}: {} vs {exact}",
                p.value
            );
            assert!(p.residual < 1e-12);
        }
    }

    #[test]
    fn bisection_matches_dense_oracle() {
        let n = 40;
        let diag: Vec<f64> = (0..n).map(|i| ((i * 7 % 11) as f64).sin() * 3.0).collect();
        let off: Vec<f64> = (0..n - 1)
            .map(|i| 0.5 + ((i * 3 % 5) as f64) * 0.1)
            .collect();
        let t = SymTridiagonal::new(diag, off);
        let oracle = dense_oracle(&t);
        for j in 0..n {
            assert!((t.eigenvalue_bisect(j) - oracle[j]).abs() < 1e-12);
        }
    }

    #[test]
    fn near_degenerate_pair_gets_orthogonal_vectors() {
        // two decoupled copies weakly linked in the middle
        let n = 61;
        let mut diag = vec![2.0; n];
        diag[30] = 60.0;
        let t = SymTridiagonal::new(diag, vec![-1.0; n - 1]);
        let pairs = t.lowest_dense(4).unwrap();
        assert!(pairs[1].value - pairs[0].value < 1e-2);
        for a in 0..4 {
            for b in 0..4 {
                let g = dot(&pairs[a].vector, &pairs[b].vector);
                let expect = if a == b { 1.0 } else { 0.0 };
                assert!((g - expect).abs() < 1e-10, "gram[{a}][{b}] = {g}");
            }
            assert!(pairs[a].residual < 1e-11);
        }
    }

    #[test]
    fn iterative_agrees_with_dense() {
        let n = 300;
        let h = 0.05;
        let diag: Vec<f64> = (0..n)
            .map(|i| {
                let x = (i as f64 - 150.0) * h;
                2.0 / (h * h) + ((x - 3.0).powi(2)).min((x + 3.0).powi(2))
            })
            .collect();
        let t = SymTridiagonal::new(diag, vec![-1.0 / (h * h); n - 1]);
        let dense = t.lowest_dense(4).unwrap();
        let iter = t.lowest_iterative(4, 1e-11, 2000).unwrap();
        for (a, b) in dense.iter().zip(&iter) {
            assert!(
                (a.value - b.value).abs() < 1e-9,
                "{} vs {}",
                a.value,
                b.value
            );
        }
    }

    #[test]
    fn k_out_of_range() {
        let t = laplacian(5);
        assert!(matches!(
            t.lowest_dense(6),
            Err(Error::KExceedsGrid { k: 6, n: 5 })
        ));
        assert!(t.lowest_dense(0).is_err());
    }
}
