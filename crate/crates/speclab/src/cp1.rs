//! Exact Bergman data on ℂP¹ with O(p) and the Fubini–Study form of area 1.
//!
//! Sections are w^k, k = 0..=p, in the affine chart. With h = (1+|w|²)^{−p}
//! and ω = π^{−1}(1+|w|²)^{−2} du dv the Gram matrix is diagonal with
//! ⟨w^k, w^k⟩ = B(k+1, p−k+1) = k!(p−k)!/(p+1)!.

use std::f64::consts::PI;

use bergman_core::jets::{JetParts, PointJets};
use bergman_core::scalar::{Coeff, Mat, PiRat, Scalar};
use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive};
use serde::{Deserialize, Serialize};

use crate::error::Result;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Cp1Spec {
    pub p: u32,
}

#[derive(Clone, Debug)]
pub struct Cp1Exact {
    pub p: u32,
    /// ⟨w^k, w^k⟩ exactly.
    pub gram: Vec<BigRational>,
    /// 1/⟨w^k, w^k⟩ in floating point.
    weights: Vec<f64>,
}

fn factorial(n: u32) -> BigInt {
    (1..=n).fold(BigInt::one(), |a, k| a * BigInt::from(k))
}

/// Volume of the area-1 round sphere.
pub const VOLUME: f64 = 1.0;

pub fn cp1_exact(spec: &Cp1Spec) -> Cp1Exact {
    let p = spec.p;
    let gram: Vec<BigRational> = (0..=p)
        .map(|k| BigRational::new(factorial(k) * factorial(p - k), factorial(p + 1)))
        .collect();
    let weights = gram.iter().map(|g| g.recip().to_f64().unwrap_or(f64::INFINITY)).collect();
    Cp1Exact { p, gram, weights }
}

impl Cp1Exact {
    pub fn dimension(&self) -> usize {
        self.p as usize + 1
    }

    /// Σ_k |w^k|²_h / ⟨w^k,w^k⟩, evaluated term by term.
    pub fn bergman(&self, w: Complex64) -> f64 {
        // |w|^{2k}(1+|w|²)^{−p} = r^k(1−r)^{p−k} with r = |w|²/(1+|w|²)
        let t = w.norm_sqr();
        let (r, s) = (t / (1.0 + t), 1.0 / (1.0 + t));
        let p = self.p as i32;
        self.weights.iter().enumerate().map(|(k, c)| c * r.powi(k as i32) * s.powi(p - k as i32)).sum()
    }

    /// P_{0,p}(w, w′) in the unitary frame e^{⊗p}/|e^{⊗p}|.
    pub fn kernel(&self, w: Complex64, wp: Complex64) -> Complex64 {
        let p = self.p as f64;
        let sum: Complex64 = self
            .weights
            .iter()
            .enumerate()
            .map(|(k, c)| (w * wp.conj()).powu(k as u32) * c)
            .sum();
        sum / ((1.0 + w.norm_sqr()) * (1.0 + wp.norm_sqr())).powf(p / 2.0)
    }

    /// (1/p)Φ_p*ω_FS divided by ω at w, from the coordinate sections and
    /// their derivatives.
    pub fn fs_pullback_ratio(&self, w: Complex64) -> f64 {
        // (i/2π)∂∂̄ log Σ|f_k|² with f_k = c_k w^k; coefficient of du∧dv is
        // π^{−1}(Σ|f′|²/F − |Σ f̄ f′|²/F²)
        let (mut f, mut fp, mut mix) = (0.0, 0.0, Complex64::default());
        for (k, c) in self.weights.iter().enumerate() {
            let v = w.powu(k as u32) * c.sqrt();
            let d = if k == 0 { Complex64::default() } else { w.powu(k as u32 - 1) * (k as f64 * c.sqrt()) };
            f += v.norm_sqr();
            fp += d.norm_sqr();
            mix += v.conj() * d;
        }
        let pull = (fp / f - mix.norm_sqr() / (f * f)) / PI;
        let omega = 1.0 / (PI * (1.0 + w.norm_sqr()).powi(2));
        pull / (self.p as f64 * omega)
    }

    /// 1 − mass of the unit peak section at w = 0 inside the geodesic ball of
    /// radius r, by Simpson quadrature over the polar angle.
    pub fn peak_complement(&self, r: f64, panels: usize) -> f64 {
        // area-1 sphere has radius 1/(2√π); |S|² = (p+1)cos^{2p}(θ/2),
        // area element ½ sinθ dθ
        let theta_r = (2.0 * PI.sqrt() * r).min(PI);
        let p = self.p as i32;
        let g = |th: f64| (self.p as f64 + 1.0) * (th / 2.0).cos().powi(2 * p) * 0.5 * th.sin();
        let m = panels.max(2) & !1;
        let h = (PI - theta_r) / m as f64;
        let mut s = g(theta_r) + g(PI);
        for i in 1..m {
            s += g(theta_r + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
        }
        s * h / 3.0
    }

    /// cos^{2(p+1)}(√π r), the same complement in closed form.
    pub fn peak_complement_closed(&self, r: f64) -> f64 {
        (PI.sqrt() * r).min(PI / 2.0).cos().powi(2 * (self.p as i32 + 1))
    }
}

/// Jets of the area-1 round sphere with L = O(1): a = 2π, Gaussian curvature
/// 4π, everything else parallel.
pub fn round_sphere_jets() -> Result<PointJets<PiRat>> {
    let two_pi = PiRat::pi()?.scale(&PiRat::from_i64(2));
    let k = PiRat::pi()?.scale(&PiRat::from_i64(4));
    let mut j = PointJets::flat(vec![two_pi], 1, true, PiRat::zero())?;
    let mut rtx = j.rtx.clone();
    // ⟨R(e_i,e_j)e_k,e_l⟩ = K(δ_il δ_jk − δ_ik δ_jl)
    for (i, jj, kk, l) in [(0, 1, 0, 1), (1, 0, 1, 0)] {
        rtx[i * 8 + jj * 4 + kk * 2 + l] = k.neg();
    }
    for (i, jj, kk, l) in [(0, 1, 1, 0), (1, 0, 0, 1)] {
        rtx[i * 8 + jj * 4 + kk * 2 + l] = k.clone();
    }
    j = PointJets::new(JetParts {
        n: 1,
        rank: 1,
        kahler: true,
        a: j.a,
        drl: j.drl,
        rtx,
        nnj: j.nnj,
        re: j.re,
        phi: Mat::zeros(1),
    })?;
    Ok(j)
}
