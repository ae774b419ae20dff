//! Lowest eigenpairs of sparse Hermitian matrices.
//!
//! Restarted block Lanczos with full reorthogonalization: each cycle grows a
//! block Krylov basis from the current Ritz vectors, projects, and solves the
//! small dense problem. The block keeps degenerate clusters resolvable.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Result, SpecError};
use crate::sparse::CsrMatrix;

#[derive(Clone, Debug)]
pub struct LanczosOptions {
    /// Residual tolerance relative to max(1, ‖A‖).
    pub tol: f64,
    /// Extra block vectors beyond the k wanted.
    pub extra: usize,
    /// Krylov basis size per cycle; 0 picks a default.
    pub krylov: usize,
    pub max_restarts: usize,
    pub seed: u64,
}

impl Default for LanczosOptions {
    fn default() -> Self {
        LanczosOptions { tol: 1e-9, extra: 2, krylov: 0, max_restarts: 60, seed: 0 }
    }
}

#[derive(Clone, Debug)]
pub struct Eigenpairs {
    /// Ascending.
    pub values: Vec<f64>,
    pub vectors: Vec<Vec<Complex64>>,
    pub residuals: Vec<f64>,
    pub restarts: usize,
}

pub(crate) fn dot(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

pub(crate) fn norm(a: &[Complex64]) -> f64 {
    a.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

/// Orthogonalizes v against the basis twice; returns the remaining norm.
fn orthogonalize(basis: &[Vec<Complex64>], v: &mut [Complex64]) -> f64 {
    for _ in 0..2 {
        for q in basis {
            let c = dot(q, v);
            for (x, y) in v.iter_mut().zip(q) {
                *x -= c * y;
            }
        }
    }
    norm(v)
}

/// A Hermitian linear map given by its action.
pub trait HermitianOperator: Sync {
    fn dim(&self) -> usize;
    fn apply(&self, x: &[Complex64]) -> Vec<Complex64>;
    /// Upper bound on the spectral radius.
    fn norm_bound(&self) -> f64;
}

impl HermitianOperator for CsrMatrix {
    fn dim(&self) -> usize {
        self.n
    }
    fn apply(&self, x: &[Complex64]) -> Vec<Complex64> {
        self.matvec(x)
    }
    fn norm_bound(&self) -> f64 {
        CsrMatrix::norm_bound(self)
    }
}

fn random_vector(rng: &mut ChaCha8Rng, n: usize) -> Vec<Complex64> {
    (0..n).map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect()
}

/// The k smallest eigenpairs of a Hermitian matrix, each with residual
/// ‖Av − λv‖ ≤ tol·max(1, ‖A‖).
pub fn low_spectrum<A: HermitianOperator + ?Sized>(a: &A, k: usize, opts: &LanczosOptions) -> Result<Eigenpairs> {
    let n = a.dim();
    if k > n {
        return Err(SpecError::InvalidSpec(format!("asked for {k} eigenpairs of a {n}×{n} matrix")));
    }
    if k == 0 {
        return Ok(Eigenpairs { values: vec![], vectors: vec![], residuals: vec![], restarts: 0 });
    }
    let scale = a.norm_bound().max(1.0);
    let block = (k + opts.extra).min(n);
    let m = if opts.krylov > 0 { opts.krylov.max(block) } else { (8 * block).max(64) }.min(n);
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut start: Vec<Vec<Complex64>> = (0..block).map(|_| random_vector(&mut rng, n)).collect();
    let mut last_residuals = Vec::new();

    for restart in 0..=opts.max_restarts {
        let mut q: Vec<Vec<Complex64>> = Vec::with_capacity(m);
        let mut aq: Vec<Vec<Complex64>> = Vec::with_capacity(m);
        let mut pending = std::mem::take(&mut start);
        while q.len() < m {
            let mut added = Vec::new();
            for mut v in pending.drain(..) {
                if q.len() >= m {
                    break;
                }
                let before = norm(&v);
                let after = orthogonalize(&q, &mut v);
                if after > 1e-10 * before.max(f64::MIN_POSITIVE) && after > 0.0 {
                    v.iter_mut().for_each(|x| *x /= after);
                    aq.push(a.apply(&v));
                    q.push(v);
                    added.push(q.len() - 1);
                }
            }
            if added.is_empty() {
                // invariant subspace: continue from fresh random directions
                if q.len() >= n {
                    break;
                }
                pending = (0..block).map(|_| random_vector(&mut rng, n)).collect();
                continue;
            }
            pending = added.iter().map(|&i| aq[i].clone()).collect();
        }

        let dim = q.len();
        let mut h = DMatrix::<Complex64>::zeros(dim, dim);
        for i in 0..dim {
            for j in i..dim {
                let v = dot(&q[i], &aq[j]);
                h[(i, j)] = v;
                h[(j, i)] = v.conj();
            }
        }
        for i in 0..dim {
            h[(i, i)] = Complex64::new(h[(i, i)].re, 0.0);
        }
        let eig = SymmetricEigen::new(h);
        let mut order: Vec<usize> = (0..dim).collect();
        order.sort_by(|&x, &y| eig.eigenvalues[x].total_cmp(&eig.eigenvalues[y]));

        let keep = block.min(dim);
        let mut values = Vec::with_capacity(keep);
        let mut vectors = Vec::with_capacity(keep);
        let mut residuals = Vec::with_capacity(keep);
        for &col in order.iter().take(keep) {
            let theta = eig.eigenvalues[col];
            let s = eig.eigenvectors.column(col);
            let mut y = vec![Complex64::default(); n];
            let mut ay = vec![Complex64::default(); n];
            for (idx, c) in s.iter().enumerate() {
                for t in 0..n {
                    y[t] += q[idx][t] * c;
                    ay[t] += aq[idx][t] * c;
                }
            }
            let r: f64 = ay.iter().zip(&y).map(|(u, v)| (u - v * theta).norm_sqr()).sum::<f64>().sqrt();
            values.push(theta);
            vectors.push(y);
            residuals.push(r);
        }
        let converged = residuals.iter().take(k).all(|&r| r <= opts.tol * scale);
        if converged || dim >= n {
            values.truncate(k);
            vectors.truncate(k);
            residuals.truncate(k);
            return Ok(Eigenpairs { values, vectors, residuals, restarts: restart });
        }
        last_residuals = residuals[..k].to_vec();
        start = vectors;
    }
    Err(SpecError::NonConvergence { what: "lanczos".into(), residuals: last_residuals })
}

/// All eigenpairs by a dense solve; the oracle for small problems.
pub fn dense_spectrum(a: &CsrMatrix) -> Eigenpairs {
    let eig = SymmetricEigen::new(a.to_dense());
    let n = a.n;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&x, &y| eig.eigenvalues[x].total_cmp(&eig.eigenvalues[y]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = order.iter().map(|&i| eig.eigenvectors.column(i).iter().copied().collect()).collect();
    Eigenpairs { values, vectors, residuals: vec![0.0; n], restarts: 0 }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn diag(values: &[f64]) -> CsrMatrix {
        CsrMatrix::from_rows(values.iter().enumerate().map(|(i, &v)| vec![(i, Complex64::new(v, 0.0))]).collect())
    }

    #[test]
    fn identity_is_k_fold() {
        let a = diag(&[1.0; 30]);
        let e = low_spectrum(&a, 4, &LanczosOptions::default()).unwrap();
        assert!(e.values.iter().all(|v| (v - 1.0).abs() < 1e-12));
    }

    #[test]
    fn diagonal_gives_first_integers() {
        let vals: Vec<f64> = (1..=200).rev().map(|i| i as f64).collect();
        let e = low_spectrum(&diag(&vals), 5, &LanczosOptions::default()).unwrap();
        for (i, v) in e.values.iter().enumerate() {
            assert!((v - (i + 1) as f64).abs() < 1e-8, "{v}");
        }
    }

    #[test]
    fn degenerate_cluster_is_resolved() {
        // a path Laplacian with a 3-fold eigenvalue planted below it
        let n = 120;
        let mut rows: Vec<Vec<(usize, Complex64)>> = (0..n)
            .map(|i| {
                let mut r = vec![(i, Complex64::new(2.0 + 1.0, 0.0))];
                if i + 1 < n {
                    r.push((i + 1, Complex64::new(-1.0, 0.0)));
                }
                if i > 0 {
                    r.push((i - 1, Complex64::new(-1.0, 0.0)));
                }
                r
            })
            .collect();
        for (i, row) in rows.iter_mut().enumerate().take(3) {
            row.clear();
            row.push((i, Complex64::new(0.5, 0.0)));
        }
        for row in rows.iter_mut().skip(3) {
            row.retain(|&(j, _)| j >= 3);
        }
        let a = CsrMatrix::from_rows(rows);
        let e = low_spectrum(&a, 4, &LanczosOptions::default()).unwrap();
        let d = dense_spectrum(&a);
        for i in 0..4 {
            assert!((e.values[i] - d.values[i]).abs() < 1e-8);
        }
    }
}
