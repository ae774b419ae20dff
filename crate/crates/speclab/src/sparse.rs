//! Compressed sparse row matrices over ℂ.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;

#[derive(Clone, Debug, PartialEq)]
pub struct CsrMatrix {
    pub n: usize,
    pub row_ptr: Vec<usize>,
    pub cols: Vec<usize>,
    pub vals: Vec<Complex64>,
}

impl CsrMatrix {
    /// Builds from per-row entry lists; duplicate columns in a row are summed.
    pub fn from_rows(rows: Vec<Vec<(usize, Complex64)>>) -> Self {
        let n = rows.len();
        let mut row_ptr = Vec::with_capacity(n + 1);
        let mut cols = Vec::new();
        let mut vals = Vec::new();
        row_ptr.push(0);
        for mut row in rows {
            row.sort_by_key(|e| e.0);
            let mut last: Option<usize> = None;
            for (c, v) in row {
                if last == Some(c) {
                    *vals.last_mut().unwrap() += v;
                } else {
                    cols.push(c);
                    vals.push(v);
                    last = Some(c);
                }
            }
            row_ptr.push(cols.len());
        }
        CsrMatrix { n, row_ptr, cols, vals }
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, Complex64)> + '_ {
        (self.row_ptr[i]..self.row_ptr[i + 1]).map(move |k| (self.cols[k], self.vals[k]))
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.row(i).find(|e| e.0 == j).map(|e| e.1).unwrap_or_default()
    }

    /// y = A x, rows in parallel.
    pub fn matvec(&self, x: &[Complex64]) -> Vec<Complex64> {
        (0..self.n)
            .into_par_iter()
            .map(|i| self.row(i).map(|(j, v)| v * x[j]).sum())
            .collect()
    }

    /// Exact equality with the conjugate transpose.
    pub fn is_hermitian(&self) -> bool {
        (0..self.n).all(|i| self.row(i).all(|(j, v)| self.get(j, i) == v.conj()))
    }

    /// Maximum absolute row sum, an upper bound for the spectral radius.
    pub fn norm_bound(&self) -> f64 {
        (0..self.n).map(|i| self.row(i).map(|(_, v)| v.norm()).sum::<f64>()).fold(0.0, f64::max)
    }

    pub fn to_dense(&self) -> DMatrix<Complex64> {
        let mut m = DMatrix::zeros(self.n, self.n);
        for i in 0..self.n {
            for (j, v) in self.row(i) {
                m[(i, j)] += v;
            }
        }
        m
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn duplicates_are_summed() {
        let m = CsrMatrix::from_rows(vec![vec![(1, c(1.0, 0.0)), (0, c(2.0, 0.0)), (1, c(0.0, 1.0))], vec![]]);
        assert_eq!(m.nnz(), 2);
        assert_eq!(m.get(0, 1), c(1.0, 1.0));
        assert_eq!(m.matvec(&[c(1.0, 0.0), c(1.0, 0.0)]), vec![c(3.0, 1.0), c(0.0, 0.0)]);
    }

    #[test]
    fn hermitian_check() {
        let h = CsrMatrix::from_rows(vec![vec![(1, c(0.0, 1.0))], vec![(0, c(0.0, -1.0))]]);
        assert!(h.is_hermitian());
        let s = CsrMatrix::from_rows(vec![vec![(1, c(0.0, 1.0))], vec![(0, c(0.0, 1.0))]]);
        assert!(!s.is_hermitian());
    }
}
