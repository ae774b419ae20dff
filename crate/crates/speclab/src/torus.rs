//! Magnetic Laplacians on flat tori ℝ²/(L₁ℤ ⊕ L₂ℤ).
//!
//! The line bundle L^p of degree p·d carries the connection ∇ = d − iA with
//! dA = B dx∧dy, B = 2πpd/(L₁L₂). Grid sections live on an N×N lattice, site
//! (j, k) at (j·h₁, k·h₂), stored at index j·N + k. Links carry the exact
//! parallel transport e^{−i∫A}, so each plaquette holds flux B·h₁h₂.
//!
//! In the Landau gauge A = Bx dy the operator commutes with y-translations.
//! Fourier modes in y are coupled only by the twisted x-boundary, which sends
//! mode m to m − pd, so the matrix splits into gcd(N, pd) cyclic real chains.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Result, SpecError};
use crate::sparse::CsrMatrix;
use crate::tridiag::CyclicTridiagonal;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Gauge {
    /// A = Bx dy, periodic in y, twisted in x.
    LandauY,
    /// A = −By dx, periodic in x, twisted in y.
    LandauX,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TorusSpec {
    pub l1: f64,
    pub l2: f64,
    /// Chern degree d = ∫ω.
    pub degree: f64,
    pub p: u32,
    /// Points per side.
    pub n: usize,
    pub gauge: Gauge,
}

/// Smallest admissible N that is a multiple of pd and at least 3pd. Each
/// chain then carries one bound state and h·√(pμ₀) is the same for all p.
pub fn default_grid(p: u32, degree: f64) -> usize {
    let f = (p as f64 * degree).round().max(0.0) as usize;
    let min = min_grid(p, degree).max(3 * f).max(8);
    if f == 0 {
        return min;
    }
    min.div_ceil(f) * f
}

/// N ≥ 8⌈√(pd)⌉.
pub fn min_grid(p: u32, degree: f64) -> usize {
    8 * ((p as f64 * degree).max(0.0).sqrt().ceil() as usize)
}

impl TorusSpec {
    /// Unit square torus of degree 1 at the default resolution.
    pub fn unit(p: u32) -> Self {
        TorusSpec { l1: 1.0, l2: 1.0, degree: 1.0, p, n: default_grid(p, 1.0), gauge: Gauge::LandauY }
    }

    pub fn with_grid(mut self, n: usize) -> Self {
        self.n = n;
        self
    }

    pub fn with_gauge(mut self, g: Gauge) -> Self {
        self.gauge = g;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.l1 > 0.0 && self.l2 > 0.0) {
            return Err(SpecError::InvalidSpec("side lengths must be positive".into()));
        }
        if self.degree <= 0.0 {
            return Err(SpecError::InvalidSpec("degree must be positive".into()));
        }
        let pd = self.p as f64 * self.degree;
        if (pd - pd.round()).abs() > 1e-9 {
            return Err(SpecError::QuantizationViolated(pd));
        }
        let min = min_grid(self.p, self.degree).max(4);
        if self.n < min {
            return Err(SpecError::GridTooCoarse { n: self.n, min });
        }
        Ok(())
    }

    /// p·d.
    pub fn flux(&self) -> i64 {
        (self.p as f64 * self.degree).round() as i64
    }

    /// B = 2πpd/(L₁L₂).
    pub fn field(&self) -> f64 {
        2.0 * PI * self.flux() as f64 / (self.l1 * self.l2)
    }

    /// μ₀ = 2πd/(L₁L₂), the eigenvalue a of 𝒥 per unit power.
    pub fn mu0(&self) -> f64 {
        2.0 * PI * self.degree / (self.l1 * self.l2)
    }

    /// pτ, subtracted exactly.
    pub fn tau_shift(&self) -> f64 {
        self.field().abs()
    }

    pub fn h(&self) -> (f64, f64) {
        (self.l1 / self.n as f64, self.l2 / self.n as f64)
    }

    pub fn area(&self) -> f64 {
        self.l1 * self.l2
    }

    pub fn cell(&self) -> f64 {
        let (h1, h2) = self.h();
        h1 * h2
    }

    /// Riemann–Roch for rank 1 on a torus: d_p = p·d.
    pub fn expected_dimension(&self) -> usize {
        self.flux().max(0) as usize
    }
}

fn cis(t: f64) -> Complex64 {
    Complex64::from_polar(1.0, t)
}

/// Δ^{L^p} on the full grid with the gauge's link phases and twisted boundary.
pub fn assemble_torus(t: &TorusSpec) -> Result<CsrMatrix> {
    t.validate()?;
    Ok(assemble_signed(t, t.field()))
}

pub(crate) fn assemble_signed(t: &TorusSpec, b: f64) -> CsrMatrix {
    let n = t.n;
    let (h1, h2) = t.h();
    let (c1, c2) = (1.0 / (h1 * h1), 1.0 / (h2 * h2));
    let idx = |j: usize, k: usize| j * n + k;
    let mut rows = Vec::with_capacity(n * n);
    for j in 0..n {
        for k in 0..n {
            let mut row = vec![(idx(j, k), Complex64::new(2.0 * c1 + 2.0 * c2, 0.0))];
            let (x, y) = (j as f64 * h1, k as f64 * h2);
            match t.gauge {
                Gauge::LandauY => {
                    let up = cis(-b * x * h2);
                    row.push((idx(j, (k + 1) % n), -up * c2));
                    row.push((idx(j, (k + n - 1) % n), -up.conj() * c2));
                    let g = cis(b * t.l1 * y);
                    row.push(if j + 1 < n { (idx(j + 1, k), (-c1).into()) } else { (idx(0, k), -g * c1) });
                    row.push(if j > 0 { (idx(j - 1, k), (-c1).into()) } else { (idx(n - 1, k), -g.conj() * c1) });
                }
                Gauge::LandauX => {
                    let right = cis(b * y * h1);
                    row.push((idx((j + 1) % n, k), -right * c1));
                    row.push((idx((j + n - 1) % n, k), -right.conj() * c1));
                    let g = cis(-b * t.l2 * x);
                    row.push(if k + 1 < n { (idx(j, k + 1), (-c2).into()) } else { (idx(j, 0), -g * c2) });
                    row.push(if k > 0 { (idx(j, k - 1), (-c2).into()) } else { (idx(j, n - 1), -g.conj() * c2) });
                }
            }
            rows.push(row);
        }
    }
    CsrMatrix::from_rows(rows)
}

/// Sum over plaquettes of the principal argument of the link product.
/// Equals −2π·pd for the conventions here.
pub fn plaquette_flux(m: &CsrMatrix, n: usize) -> f64 {
    let idx = |j: usize, k: usize| (j % n) * n + (k % n);
    let link = |a: usize, b: usize| {
        let v = m.get(a, b);
        v / v.norm()
    };
    let mut total = 0.0;
    for j in 0..n {
        for k in 0..n {
            let (a, b, c, d) = (idx(j, k), idx(j + 1, k), idx(j + 1, k + 1), idx(j, k + 1));
            // H entries are −U, and the four signs cancel
            total += (link(a, b) * link(b, c) * link(c, d) * link(d, a)).arg();
        }
    }
    total
}

/// One cyclic chain of coupled Fourier modes.
#[derive(Clone, Debug)]
pub struct Chain {
    /// Mode of each segment; site s = t·N + j carries mode modes[t] at column j.
    pub modes: Vec<usize>,
    pub matrix: CsrMatrix,
    pub tridiag: CyclicTridiagonal,
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Splits the Landau-y operator with signed field b into its chains.
pub(crate) fn landau_chains(l1: f64, l2: f64, n: usize, b: f64) -> Vec<Chain> {
    let (h1, h2) = (l1 / n as f64, l2 / n as f64);
    let (c1, c2) = (1.0 / (h1 * h1), 1.0 / (h2 * h2));
    let f = (b * l1 * l2 / (2.0 * PI)).round() as i64;
    let g = gcd(n, f.unsigned_abs() as usize);
    let segs = n / g;
    (0..g)
        .map(|m0| {
            let modes: Vec<usize> = (0..segs).map(|t| (m0 as i64 - t as i64 * f).rem_euclid(n as i64) as usize).collect();
            let len = segs * n;
            let diag = (0..len)
                .map(|s| {
                    let (t, j) = (s / n, s % n);
                    let theta = -b * j as f64 * h1 * h2 + 2.0 * PI * modes[t] as f64 / n as f64;
                    2.0 * c1 + c2 * (2.0 - 2.0 * theta.cos())
                })
                .collect();
            let tridiag = CyclicTridiagonal { diag, off: -c1 };
            Chain { modes, matrix: tridiag.to_csr(), tridiag }
        })
        .collect()
}

/// Grid section ψ(j, k) = N^{−1/2} Σ_t c(t, j) e^{2πi m_t k/N}.
pub(crate) fn chain_to_grid(chain: &Chain, n: usize, c: &[Complex64]) -> Vec<Complex64> {
    let norm = 1.0 / (n as f64).sqrt();
    let mut out = vec![Complex64::default(); n * n];
    for (t, &m) in chain.modes.iter().enumerate() {
        let phase: Vec<Complex64> = (0..n).map(|k| cis(2.0 * PI * ((m * k) % n) as f64 / n as f64)).collect();
        for j in 0..n {
            let a = c[t * n + j] * norm;
            if a == Complex64::default() {
                continue;
            }
            for k in 0..n {
                out[j * n + k] += a * phase[k];
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lanczos::dense_spectrum;

    #[test]
    fn hermitian_bit_exact() {
        for gauge in [Gauge::LandauY, Gauge::LandauX] {
            let t = TorusSpec::unit(3).with_grid(16).with_gauge(gauge);
            assert!(assemble_torus(&t).unwrap().is_hermitian());
        }
    }

    #[test]
    fn total_flux_is_quantized() {
        for gauge in [Gauge::LandauY, Gauge::LandauX] {
            let t = TorusSpec::unit(3).with_grid(16).with_gauge(gauge);
            let m = assemble_torus(&t).unwrap();
            let flux = plaquette_flux(&m, t.n);
            assert!((flux.abs() - 2.0 * PI * 3.0).abs() < 1e-9, "{flux}");
        }
    }

    #[test]
    fn zero_power_is_the_plain_laplacian() {
        let t = TorusSpec::unit(0).with_grid(8);
        let e = dense_spectrum(&assemble_torus(&t).unwrap());
        assert!(e.values[0].abs() < 1e-9);
        let v = &e.vectors[0];
        assert!(v.iter().all(|x| (x.norm() - v[0].norm()).abs() < 1e-9));
    }

    #[test]
    fn validation() {
        let mut t = TorusSpec::unit(8);
        t.n = 16;
        assert!(matches!(t.validate(), Err(SpecError::GridTooCoarse { .. })));
        let mut t = TorusSpec::unit(3);
        t.degree = 0.5;
        assert!(matches!(t.validate(), Err(SpecError::QuantizationViolated(_))));
    }

    #[test]
    fn default_grid_rule() {
        assert_eq!(default_grid(8, 1.0), 24);
        assert_eq!(default_grid(12, 1.0), 36);
        assert_eq!(default_grid(16, 1.0), 48);
        assert_eq!(default_grid(48, 1.0), 144);
        assert_eq!(default_grid(2, 1.0), 16);
        for p in [8, 12, 16, 24, 32, 48] {
            assert!(TorusSpec::unit(p).validate().is_ok());
        }
    }

    #[test]
    fn chains_reproduce_the_full_spectrum() {
        let t = TorusSpec::unit(2).with_grid(16);
        let full = dense_spectrum(&assemble_torus(&t).unwrap());
        let mut parts: Vec<f64> = landau_chains(1.0, 1.0, 16, t.field())
            .iter()
            .flat_map(|c| dense_spectrum(&c.matrix).values)
            .collect();
        parts.sort_by(f64::total_cmp);
        assert_eq!(parts.len(), full.values.len());
        for (a, b) in parts.iter().zip(&full.values) {
            assert!((a - b).abs() < 1e-8 * b.abs().max(1.0), "{a} vs {b}");
        }
    }

    #[test]
    fn chain_vectors_are_grid_eigenvectors() {
        let t = TorusSpec::unit(2).with_grid(16);
        let h = assemble_torus(&t).unwrap();
        let chains = landau_chains(1.0, 1.0, 16, t.field());
        let e = dense_spectrum(&chains[1].matrix);
        let psi = chain_to_grid(&chains[1], 16, &e.vectors[0]);
        let hpsi = h.matvec(&psi);
        let err: f64 = hpsi.iter().zip(&psi).map(|(a, b)| (a - b * e.values[0]).norm()).fold(0.0, f64::max);
        assert!(err < 1e-8 * e.values[0].abs().max(1.0), "{err}");
    }
}
