//! Real symmetric cyclic tridiagonal matrices and shift-invert solves.

use num_complex::Complex64;

use crate::error::{Result, SpecError};
use crate::lanczos::{low_spectrum, Eigenpairs, HermitianOperator, LanczosOptions};
use crate::sparse::CsrMatrix;

/// diag on the diagonal, `off` on both cyclic off-diagonals.
#[derive(Clone, Debug)]
pub struct CyclicTridiagonal {
    pub diag: Vec<f64>,
    pub off: f64,
}

/// A − σ factored for repeated solves (Thomas sweep plus a Sherman–Morrison
/// correction for the corner entries).
#[derive(Clone, Debug)]
pub struct ShiftedFactor {
    n: usize,
    off: f64,
    /// Modified superdiagonal c′ and pivots of the tridiagonal part.
    cp: Vec<f64>,
    piv: Vec<f64>,
    gamma: f64,
    z: Vec<f64>,
    vz: f64,
}

impl CyclicTridiagonal {
    pub fn n(&self) -> usize {
        self.diag.len()
    }

    /// Lower bound on the spectrum by Gershgorin discs.
    pub fn lower_bound(&self) -> f64 {
        self.diag.iter().fold(f64::INFINITY, |m, d| m.min(d - 2.0 * self.off.abs()))
    }

    pub fn to_csr(&self) -> CsrMatrix {
        let n = self.n();
        CsrMatrix::from_rows(
            (0..n)
                .map(|s| {
                    vec![
                        (s, Complex64::new(self.diag[s], 0.0)),
                        ((s + 1) % n, Complex64::new(self.off, 0.0)),
                        ((s + n - 1) % n, Complex64::new(self.off, 0.0)),
                    ]
                })
                .collect(),
        )
    }

    pub fn factor(&self, sigma: f64) -> Result<ShiftedFactor> {
        let n = self.n();
        if n < 3 {
            return Err(SpecError::InvalidSpec(format!("cyclic tridiagonal solve needs n ≥ 3, got {n}")));
        }
        let e = self.off;
        let mut b: Vec<f64> = self.diag.iter().map(|d| d - sigma).collect();
        let gamma = -b[0];
        b[0] -= gamma;
        b[n - 1] -= e * e / gamma;
        let mut cp = vec![0.0; n];
        let mut piv = vec![0.0; n];
        piv[0] = b[0];
        for i in 1..n {
            cp[i - 1] = e / piv[i - 1];
            piv[i] = b[i] - e * cp[i - 1];
            if !(piv[i].abs() > 1e-300) {
                return Err(SpecError::IllConditioned("zero pivot in cyclic tridiagonal solve".into()));
            }
        }
        let mut f = ShiftedFactor { n, off: e, cp, piv, gamma, z: Vec::new(), vz: 0.0 };
        let mut u = vec![0.0; n];
        u[0] = gamma;
        u[n - 1] = e;
        let z = f.thomas(&u);
        f.vz = z[0] + e / gamma * z[n - 1];
        f.z = z;
        Ok(f)
    }
}

impl ShiftedFactor {
    fn thomas<T>(&self, rhs: &[T]) -> Vec<T>
    where
        T: Copy + std::ops::Sub<Output = T> + std::ops::Mul<f64, Output = T> + std::ops::Div<f64, Output = T>,
    {
        let n = self.n;
        let mut y: Vec<T> = Vec::with_capacity(n);
        y.push(rhs[0] / self.piv[0]);
        for i in 1..n {
            let prev = y[i - 1];
            y.push((rhs[i] - prev * self.off) / self.piv[i]);
        }
        for i in (0..n - 1).rev() {
            let next = y[i + 1];
            y[i] = y[i] - next * self.cp[i];
        }
        y
    }

    /// x with (A − σ)x = rhs.
    pub fn solve(&self, rhs: &[Complex64]) -> Vec<Complex64> {
        let y = self.thomas(rhs);
        let vy = y[0] + y[self.n - 1] * (self.off / self.gamma);
        let s = vy / (1.0 + self.vz);
        y.iter().zip(&self.z).map(|(a, z)| a - s * z).collect()
    }
}

/// −(A − σ)⁻¹, whose lowest eigenvalues belong to the lowest of A.
struct NegInverse<'a>(&'a ShiftedFactor, f64);

impl HermitianOperator for NegInverse<'_> {
    fn dim(&self) -> usize {
        self.0.n
    }
    fn apply(&self, x: &[Complex64]) -> Vec<Complex64> {
        self.0.solve(x).into_iter().map(|v| -v).collect()
    }
    fn norm_bound(&self) -> f64 {
        self.1
    }
}

/// The k lowest eigenpairs by shift-invert Lanczos, with residuals measured
/// on A itself against `opts.tol`.
pub fn low_spectrum_shift_invert(a: &CyclicTridiagonal, k: usize, opts: &LanczosOptions) -> Result<Eigenpairs> {
    let csr = a.to_csr();
    if a.n() < 3 || k >= a.n() {
        return low_spectrum(&csr, k, opts);
    }
    let lb = a.lower_bound();
    let spread = a.diag.iter().fold(0.0_f64, |m, d| m.max(d.abs())) + 2.0 * a.off.abs();
    // far enough below the spectrum for a stable sweep, close enough for a
    // useful spectral ratio
    let sigma = lb - (1e-3 * spread).max(1.0);
    let f = a.factor(sigma)?;
    let op = NegInverse(&f, 1.0 / (lb - sigma));
    let scale = csr.norm_bound().max(1.0);
    let mut inner_tol = opts.tol * 1e-2;
    let mut last = Vec::new();
    for _ in 0..4 {
        let e = low_spectrum(&op, k, &LanczosOptions { tol: inner_tol, ..opts.clone() })?;
        let values: Vec<f64> = e.values.iter().map(|t| sigma - 1.0 / t).collect();
        let residuals: Vec<f64> = e
            .vectors
            .iter()
            .zip(&values)
            .map(|(v, l)| csr.matvec(v).iter().zip(v).map(|(x, y)| (x - y * l).norm_sqr()).sum::<f64>().sqrt())
            .collect();
        if residuals.iter().all(|&r| r <= opts.tol * scale) {
            return Ok(Eigenpairs { values, vectors: e.vectors, residuals, restarts: e.restarts });
        }
        last = residuals;
        inner_tol *= 1e-3;
    }
    Err(SpecError::NonConvergence { what: "shift-invert lanczos".into(), residuals: last })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lanczos::dense_spectrum;

    fn sample(n: usize) -> CyclicTridiagonal {
        CyclicTridiagonal { diag: (0..n).map(|i| 3.0 + (i as f64 * 0.7).sin()).collect(), off: -1.2 }
    }

    #[test]
    fn solve_inverts_the_shifted_matrix() {
        let a = sample(9);
        let f = a.factor(-0.5).unwrap();
        let x: Vec<Complex64> = (0..9).map(|i| Complex64::new(i as f64, 1.0 - i as f64 * 0.3)).collect();
        let mut ax = a.to_csr().matvec(&x);
        for (v, xi) in ax.iter_mut().zip(&x) {
            *v += xi * 0.5;
        }
        let back = f.solve(&ax);
        for (u, v) in back.iter().zip(&x) {
            assert!((u - v).norm() < 1e-12);
        }
    }

    #[test]
    fn shift_invert_matches_dense() {
        let a = sample(60);
        let d = dense_spectrum(&a.to_csr());
        let e = low_spectrum_shift_invert(&a, 5, &LanczosOptions::default()).unwrap();
        for i in 0..5 {
            assert!((e.values[i] - d.values[i]).abs() < 1e-9, "{} {}", e.values[i], d.values[i]);
        }
    }
}
