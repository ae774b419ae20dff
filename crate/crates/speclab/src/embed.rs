//! Kodaira-map pullbacks, peak sections and near-diagonal kernel checks.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Result, SpecError};
use crate::spectral::{bergman_fields, radial_kernel, SpectralResult};
use crate::theta::ThetaOracle;

/// Coefficient of e₁∧e₂ in
/// (i/2π)[f₀⁻¹ d_x d_y f − f₀⁻² d_x f ∧ d_y f] at the diagonal point, with
/// `f(u, v)` the kernel at offsets u·h, v·h from it in the radial frame.
pub fn pullback_coefficient(f: impl Fn([i64; 2], [i64; 2]) -> Complex64, h: [f64; 2]) -> f64 {
    let o = [0, 0];
    let e = |a: usize, s: i64| if a == 0 { [s, 0] } else { [0, s] };
    let f0 = f(o, o);
    let dx = |a: usize| (f(e(a, 1), o) - f(e(a, -1), o)) / (2.0 * h[a]);
    let dy = |b: usize| (f(o, e(b, 1)) - f(o, e(b, -1))) / (2.0 * h[b]);
    let dxy = |a: usize, b: usize| {
        (f(e(a, 1), e(b, 1)) - f(e(a, 1), e(b, -1)) - f(e(a, -1), e(b, 1)) + f(e(a, -1), e(b, -1))) / (4.0 * h[a] * h[b])
    };
    let second = (dxy(0, 1) - dxy(1, 0)) / f0;
    let first = (dx(0) * dy(1) - dx(1) * dy(0)) / (f0 * f0);
    (Complex64::i() / (2.0 * PI) * (second - first)).re
}

#[derive(Clone, Debug, Serialize)]
pub struct PullbackReport {
    pub p: u32,
    /// Lattice points sampled and (1/p)Φ*ω_FS / ω there.
    pub samples: Vec<([usize; 2], f64)>,
    /// sup |(1/p)Φ*ω_FS − ω|_g over the samples.
    pub sup_error: f64,
}

fn base_point_free(r: &SpectralResult) -> Result<()> {
    let b = &bergman_fields(r, &[0])[0];
    let min = b.iter().copied().fold(f64::INFINITY, f64::min);
    let max = b.iter().copied().fold(0.0, f64::max);
    if !(min > 1e-8 * max) {
        return Err(SpecError::BaseLocus { value: min });
    }
    Ok(())
}

/// Pullback from grid eigenvectors, by central differences at lattice points
/// every `stride` sites.
pub fn fs_pullback_grid(r: &SpectralResult, stride: usize) -> Result<PullbackReport> {
    base_point_free(r)?;
    let t = &r.spec;
    let (h1, h2) = t.h();
    let omega = t.degree / t.area();
    let pts: Vec<[usize; 2]> = (0..t.n)
        .step_by(stride.max(1))
        .flat_map(|j| (0..t.n).step_by(stride.max(1)).map(move |k| [j, k]))
        .collect();
    let samples: Vec<([usize; 2], f64)> = pts
        .par_iter()
        .map(|&x| {
            let x0 = [x[0] as i64, x[1] as i64];
            let c = pullback_coefficient(|u, v| radial_kernel(r, x0, u, v), [h1, h2]);
            (x, c / (t.p as f64 * omega))
        })
        .collect();
    let sup_error = samples.iter().map(|s| (s.1 - 1.0).abs()).fold(0.0, f64::max);
    Ok(PullbackReport { p: t.p, samples, sup_error })
}

/// Pullback from the theta basis with difference step `h` (physical units)
/// at the given points.
pub fn fs_pullback_theta(o: &ThetaOracle, points: &[[f64; 2]], h: f64) -> Vec<f64> {
    let t = &o.spec;
    let omega = t.degree / t.area();
    points
        .iter()
        .map(|&x0| {
            let f = |u: [i64; 2], v: [i64; 2]| {
                o.radial_kernel(x0, [u[0] as f64 * h, u[1] as f64 * h], [v[0] as f64 * h, v[1] as f64 * h])
            };
            pullback_coefficient(f, [h, h]) / (t.p as f64 * omega)
        })
        .collect()
}

#[derive(Clone, Debug, Serialize)]
pub struct PeakReport {
    pub p: u32,
    pub x0: [usize; 2],
    pub radius: f64,
    /// ‖S‖², 1 by the reproducing property.
    pub norm: f64,
    /// ∫ over the geodesic ball of |S|².
    pub mass: f64,
    /// |S(x0)|², equal to B_{0,p}(x0).
    pub peak_sq: f64,
    pub bergman_x0: f64,
}

/// Distance on the rectangular torus between lattice sites.
fn torus_distance(r: &SpectralResult, a: [usize; 2], b: [usize; 2]) -> f64 {
    let t = &r.spec;
    let (h1, h2) = t.h();
    let wrap = |d: f64, l: f64| {
        let d = d.rem_euclid(l);
        d.min(l - d)
    };
    let dx = wrap((a[0] as f64 - b[0] as f64) * h1, t.l1);
    let dy = wrap((a[1] as f64 - b[1] as f64) * h2, t.l2);
    dx.hypot(dy)
}

/// The unit section P_{0,p}(·, x0)/√B_{0,p}(x0) and its mass near x0.
pub fn peak_section(r: &SpectralResult, x0: [usize; 2], radius: f64) -> Result<PeakReport> {
    let t = &r.spec;
    let n = t.n;
    let cell = t.cell();
    let i0 = x0[0] * n + x0[1];
    let bergman_x0: f64 = r.vectors.iter().map(|v| v[i0].norm_sqr()).sum::<f64>() / cell;
    if !(bergman_x0 > 0.0) {
        return Err(SpecError::BaseLocus { value: bergman_x0 });
    }
    let (mut norm, mut mass, mut peak_sq) = (0.0, 0.0, 0.0);
    for j in 0..n {
        for k in 0..n {
            let i = j * n + k;
            let pk: Complex64 = r.vectors.iter().map(|v| v[i] * v[i0].conj()).sum::<Complex64>() / cell;
            let s2 = pk.norm_sqr() / bergman_x0;
            norm += s2 * cell;
            if torus_distance(r, [j, k], x0) < radius {
                mass += s2 * cell;
            }
            if i == i0 {
                peak_sq = s2;
            }
        }
    }
    Ok(PeakReport { p: t.p, x0, radius, norm, mass, peak_sq, bergman_x0 })
}

#[derive(Clone, Debug, Serialize)]
pub struct NearDiagonalReport {
    pub p: u32,
    pub sigma: f64,
    /// Number of (Z, Z′) pairs compared.
    pub pairs: usize,
    /// sup |p⁻¹P_{0,p}(Z, Z′) − prediction(Z, Z′)|.
    pub sup_error: f64,
    /// The same at Z = Z′ = 0.
    pub origin_error: f64,
}

/// Compares p⁻¹P_{0,p}(x0 + Z, x0 + Z′) in the radial frame at the grid
/// centre with `predict(Z, Z′)` over lattice offsets |Z|, |Z′| ≤ σ/√p,
/// keeping at most `max_offsets` offsets (evenly strided).
pub fn near_diagonal_check(
    r: &SpectralResult,
    sigma: f64,
    max_offsets: usize,
    predict: impl Fn([f64; 2], [f64; 2]) -> Complex64 + Sync,
) -> NearDiagonalReport {
    let t = &r.spec;
    let p = t.p as f64;
    let (h1, h2) = t.h();
    let radius = sigma / p.sqrt();
    let x0 = [(t.n / 2) as i64, (t.n / 2) as i64];
    let (m1, m2) = ((radius / h1).floor() as i64, (radius / h2).floor() as i64);
    let mut offsets: Vec<[i64; 2]> = Vec::new();
    for a in -m1..=m1 {
        for b in -m2..=m2 {
            if (a as f64 * h1).hypot(b as f64 * h2) <= radius {
                offsets.push([a, b]);
            }
        }
    }
    let stride = offsets.len().div_ceil(max_offsets.max(1)).max(1);
    let mut kept: Vec<[i64; 2]> = offsets.iter().copied().step_by(stride).collect();
    if !kept.contains(&[0, 0]) {
        kept.push([0, 0]);
    }
    let phys = |o: [i64; 2]| [o[0] as f64 * h1, o[1] as f64 * h2];
    let err = |z: [i64; 2], zp: [i64; 2]| (radial_kernel(r, x0, z, zp) / p - predict(phys(z), phys(zp))).norm();
    let sup_error = kept
        .par_iter()
        .map(|&z| kept.iter().map(|&zp| err(z, zp)).fold(0.0, f64::max))
        .reduce(|| 0.0, f64::max);
    NearDiagonalReport {
        p: t.p,
        sigma,
        pairs: kept.len() * kept.len(),
        sup_error,
        origin_error: err([0, 0], [0, 0]),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lanczos::LanczosOptions;
    use crate::spectral::solve_torus;
    use crate::torus::TorusSpec;
    use bergman_core::wick::pn_value;

    #[test]
    fn model_kernel_pullback_is_the_curvature() {
        // P^N(Z, Z′) with a gives a/2π for any step
        let a = 3.7;
        let h = 1e-3;
        let f = |u: [i64; 2], v: [i64; 2]| {
            pn_value(&[a], &[u[0] as f64 * h, u[1] as f64 * h], &[v[0] as f64 * h, v[1] as f64 * h])
        };
        let c = pullback_coefficient(f, [h, h]);
        assert!((c - a / (2.0 * PI)).abs() < 1e-4, "{c}");
    }

    #[test]
    fn grid_quantities_are_consistent() {
        let t = TorusSpec::unit(8);
        let r = solve_torus(&t, &LanczosOptions::default()).unwrap();
        let pk = peak_section(&r, [3, 5], 0.4).unwrap();
        assert!((pk.norm - 1.0).abs() < 1e-8);
        assert!((pk.peak_sq - pk.bergman_x0).abs() < 1e-8 * pk.bergman_x0);
        assert!(pk.mass > 0.9 && pk.mass <= pk.norm + 1e-12);
        let pb = fs_pullback_grid(&r, 6).unwrap();
        assert!(pb.sup_error < 0.2, "{}", pb.sup_error);
        // σ = 0.5 keeps the window inside half a period
        let nd = near_diagonal_check(&r, 0.5, 40, |z, zp| {
            let s = 8f64.sqrt();
            pn_value(&[t.mu0()], &[z[0] * s, z[1] * s], &[zp[0] * s, zp[1] * s])
        });
        assert!(nd.sup_error < 1e-2 && nd.origin_error < 1e-4, "{nd:?}");
    }
}
