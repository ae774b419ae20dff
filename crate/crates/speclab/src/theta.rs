//! Exact lowest-level sections on the flat torus from theta series.
//!
//! In the Landau gauge A = Bx dy the bound states of Δ_p − pτ are
//!
//!   ψ_m(x, y) = Σ_s e^{i k_{m+s·pd} y} exp(−B(x − k_{m+s·pd}/B)²/2),
//!
//! k_n = 2πn/L₂, for m = 0, …, pd − 1: level-pd theta functions in the
//! gauge used by the grid. The basis is orthonormalized numerically.

use std::f64::consts::PI;

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};
use num_complex::Complex64;

use crate::error::{Result, SpecError};
use crate::spectral::radial_chi;
use crate::torus::{Gauge, TorusSpec};

/// Gaussian tail allowed by the truncation.
pub const TAIL_BOUND: f64 = 1e-14;

#[derive(Clone, Debug)]
pub struct ThetaOracle {
    pub spec: TorusSpec,
    /// Series terms |s| ≤ m_trunc.
    pub m_trunc: i64,
    /// Bound on the neglected tail relative to the peak.
    pub tail: f64,
    /// Gram matrix G_{mn} = ∫ψ_m ψ̄_n by quadrature.
    pub gram: DMatrix<Complex64>,
    chol: Cholesky<Complex64, Dyn>,
}

fn tail_estimate(b: f64, l1: f64, m: i64) -> f64 {
    // terms with |s| > m sit at distance ≥ (|s| − 1)L₁ from any x in [0, L₁)
    let mut t = 0.0;
    for s in (m + 1)..(m + 60) {
        t += 2.0 * (-0.5 * b * ((s - 1) as f64 * l1).powi(2)).exp();
    }
    t
}

impl ThetaOracle {
    pub fn new(t: &TorusSpec) -> Result<Self> {
        t.validate()?;
        if t.p == 0 {
            return Err(SpecError::InvalidSpec("theta oracle needs p ≥ 1".into()));
        }
        let b = t.field();
        let mut m = 1;
        while tail_estimate(b, t.l1, m) >= TAIL_BOUND {
            m += 1;
            if m > 10_000 {
                return Err(SpecError::TruncationBound(tail_estimate(b, t.l1, m)));
            }
        }
        let tail = tail_estimate(b, t.l1, m);
        let mut o = ThetaOracle { spec: t.clone(), m_trunc: m, tail, gram: DMatrix::zeros(0, 0), chol: Cholesky::new(DMatrix::identity(1, 1)).unwrap() };
        let dp = t.expected_dimension();
        // periodic trapezoid rule; ψ_m ψ̄_n is smooth and doubly periodic
        let q = (4 * t.n).max(64);
        let (h1, h2) = (t.l1 / q as f64, t.l2 / q as f64);
        let mut gram = DMatrix::<Complex64>::zeros(dp, dp);
        for j in 0..q {
            for k in 0..q {
                let v = o.raw_sections([j as f64 * h1, k as f64 * h2]);
                for a in 0..dp {
                    for c in a..dp {
                        gram[(a, c)] += v[a] * v[c].conj() * (h1 * h2);
                    }
                }
            }
        }
        for a in 0..dp {
            for c in 0..a {
                gram[(a, c)] = gram[(c, a)].conj();
            }
        }
        o.chol = Cholesky::new(gram.clone()).ok_or_else(|| SpecError::InvalidSpec("theta Gram matrix is not positive definite".into()))?;
        o.gram = gram;
        Ok(o)
    }

    /// (ψ_0(x), …, ψ_{pd−1}(x)) at a point of ℝ², Landau-y gauge.
    pub fn raw_sections(&self, x: [f64; 2]) -> Vec<Complex64> {
        let t = &self.spec;
        let f = t.flux();
        let b = t.field();
        (0..f)
            .map(|m| {
                let s0 = (x[0] / t.l1 - m as f64 / f as f64).round() as i64;
                let mut acc = Complex64::default();
                for s in (s0 - self.m_trunc)..=(s0 + self.m_trunc) {
                    let kn = 2.0 * PI * (m + s * f) as f64 / t.l2;
                    let g = (-0.5 * b * (x[0] - kn / b).powi(2)).exp();
                    acc += Complex64::from_polar(g, kn * x[1]);
                }
                acc
            })
            .collect()
    }

    /// Orthonormal-basis values L⁻¹ψ(x).
    pub fn sections(&self, x: [f64; 2]) -> Vec<Complex64> {
        let v = DVector::from_vec(self.raw_sections(x));
        let w = self.chol.l_dirty().solve_lower_triangular(&v).unwrap_or(v);
        w.iter().copied().collect()
    }

    pub fn bergman(&self, x: [f64; 2]) -> f64 {
        self.sections(x).iter().map(|c| c.norm_sqr()).sum()
    }

    /// P_{0,p}(x, y) in the Landau-y gauge.
    pub fn kernel(&self, x: [f64; 2], y: [f64; 2]) -> Complex64 {
        let (a, b) = (self.sections(x), self.sections(y));
        a.iter().zip(&b).map(|(u, v)| u * v.conj()).sum()
    }

    /// P_{0,p}(x0 + Z, x0 + Z′) in the frame parallel along rays from x0.
    pub fn radial_kernel(&self, x0: [f64; 2], z: [f64; 2], zp: [f64; 2]) -> Complex64 {
        let b = self.spec.field();
        let (x, y) = ([x0[0] + z[0], x0[1] + z[1]], [x0[0] + zp[0], x0[1] + zp[1]]);
        let phase = -radial_chi(Gauge::LandauY, b, x, x0) + radial_chi(Gauge::LandauY, b, y, x0);
        self.kernel(x, y) * Complex64::from_polar(1.0, phase)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dimension_and_gram() {
        let t = TorusSpec::unit(6);
        let o = ThetaOracle::new(&t).unwrap();
        assert_eq!(o.gram.nrows(), 6);
        assert!(o.tail < TAIL_BOUND);
        // ‖ψ_m‖² = L₂√(π/B), and distinct y-momenta are orthogonal
        let expect = (PI / t.field()).sqrt();
        for a in 0..6 {
            for c in 0..6 {
                let want = if a == c { expect } else { 0.0 };
                assert!((o.gram[(a, c)] - want).norm() < 1e-12, "{a} {c}");
            }
        }
    }

    #[test]
    fn quasi_periodicity_matches_the_grid_transition() {
        let t = TorusSpec::unit(3);
        let o = ThetaOracle::new(&t).unwrap();
        let (x, y) = (0.3, 0.7);
        let g = Complex64::from_polar(1.0, t.field() * t.l1 * y);
        for (a, b) in o.raw_sections([x + 1.0, y]).iter().zip(o.raw_sections([x, y])) {
            assert!((a - g * b).norm() < 1e-12);
        }
        for (a, b) in o.raw_sections([x, y + 1.0]).iter().zip(o.raw_sections([x, y])) {
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn bergman_density_ripple_is_exponentially_small() {
        // translations outside Λ/pd change the bundle, so B_p is constant only
        // up to a ripple of order e^{−πp/2}
        let xs = [[0.0, 0.0], [0.13, 0.71], [0.5, 0.25], [0.1, 0.0]];
        let dev = |p: u32| {
            let o = ThetaOracle::new(&TorusSpec::unit(p)).unwrap();
            xs.iter().map(|&x| (o.bergman(x) / p as f64 - 1.0).abs()).fold(0.0, f64::max)
        };
        let (d5, d12) = (dev(5), dev(12));
        assert!(d5 > 1e-4 && d5 < 1e-2, "{d5}");
        assert!(d12 < 1e-6 && d12 < d5 * 1e-3, "{d12}");
    }
}
