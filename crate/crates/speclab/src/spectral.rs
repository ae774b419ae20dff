//! Bound-state clusters of Δ_p − pτ on the torus and the fields built from them.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Result, SpecError};
use crate::lanczos::LanczosOptions;
use crate::tridiag::low_spectrum_shift_invert;
use crate::torus::{chain_to_grid, landau_chains, Gauge, TorusSpec};

#[derive(Clone, Debug)]
pub struct SpectralResult {
    pub spec: TorusSpec,
    /// Computed eigenvalues of Δ_p − pτ, ascending; the lowest few per chain.
    pub eigenvalues: Vec<f64>,
    /// Cluster eigenvectors as grid sections in the spec's gauge, unit ℓ² norm.
    pub vectors: Vec<Vec<Complex64>>,
    /// d_p, the number of bound states.
    pub cluster: usize,
    pub max_residual: f64,
}

impl SpectralResult {
    pub fn p(&self) -> u32 {
        self.spec.p
    }

    pub fn cluster_values(&self) -> &[f64] {
        &self.eigenvalues[..self.cluster]
    }

    /// Smallest eigenvalue above the cluster.
    pub fn next(&self) -> Option<f64> {
        self.eigenvalues.get(self.cluster).copied()
    }
}

/// Eigenpairs below and just above the gap, solved chain by chain.
pub fn solve_torus(t: &TorusSpec, opts: &LanczosOptions) -> Result<SpectralResult> {
    t.validate()?;
    let n = t.n;
    // the Landau-x problem is the Landau-y problem on the transposed grid
    let (l1, l2, b) = match t.gauge {
        Gauge::LandauY => (t.l1, t.l2, t.field()),
        Gauge::LandauX => (t.l2, t.l1, -t.field()),
    };
    let chains = landau_chains(l1, l2, n, b);
    let per_chain = t.expected_dimension() / chains.len() + 2;
    let solved: Vec<_> = chains
        .par_iter()
        .enumerate()
        .map(|(i, c)| {
            let o = LanczosOptions { seed: opts.seed.wrapping_add(i as u64), ..opts.clone() };
            low_spectrum_shift_invert(&c.tridiag, per_chain.min(c.matrix.n), &o)
        })
        .collect::<Result<Vec<_>>>()?;

    let shift = t.tau_shift();
    let mut all: Vec<(f64, usize, usize)> = Vec::new();
    let mut max_residual: f64 = 0.0;
    for (ci, e) in solved.iter().enumerate() {
        for (vi, v) in e.values.iter().enumerate() {
            all.push((v - shift, ci, vi));
        }
        max_residual = e.residuals.iter().copied().fold(max_residual, f64::max);
    }
    all.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));

    let boundary = t.p as f64 * t.mu0();
    let cluster = if t.p == 0 {
        all.iter().take_while(|e| e.0.abs() < 1e-8 * t.n as f64 * t.n as f64).count()
    } else {
        if let Some(e) = all.iter().find(|e| e.0 > 0.5 * boundary && e.0 < 1.5 * boundary) {
            return Err(SpecError::AmbiguousCluster { p: t.p, value: e.0, boundary });
        }
        all.iter().take_while(|e| e.0 < boundary).count()
    };
    // every chain must show a level past the cluster, or the gap is unseen
    for (ci, e) in solved.iter().enumerate() {
        let inside = all[..cluster].iter().filter(|x| x.1 == ci).count();
        if inside >= e.values.len() {
            return Err(SpecError::NonConvergence { what: format!("chain {ci} saw no level above the cluster"), residuals: vec![] });
        }
    }

    let vectors = all[..cluster]
        .iter()
        .map(|&(_, ci, vi)| {
            let psi = chain_to_grid(&chains[ci], n, &solved[ci].vectors[vi]);
            match t.gauge {
                Gauge::LandauY => psi,
                Gauge::LandauX => transpose(&psi, n),
            }
        })
        .collect();
    Ok(SpectralResult {
        spec: t.clone(),
        eigenvalues: all.iter().map(|e| e.0).collect(),
        vectors,
        cluster,
        max_residual,
    })
}

fn transpose(v: &[Complex64], n: usize) -> Vec<Complex64> {
    let mut out = vec![Complex64::default(); n * n];
    for j in 0..n {
        for k in 0..n {
            out[k * n + j] = v[j * n + k];
        }
    }
    out
}

#[derive(Clone, Debug, Serialize)]
pub struct GapReport {
    pub p: u32,
    pub d_p: usize,
    /// Riemann–Roch value p·d.
    pub expected: usize,
    /// max |λ| over the cluster.
    pub c_est: f64,
    pub next: f64,
    /// 2pμ₀.
    pub gap_target: f64,
    /// 2pμ₀ − next; the constant C the gap estimate needs at this p.
    pub deficit: f64,
    pub dimension_ok: bool,
    pub gap_ok: bool,
}

pub fn gap_and_dimension(r: &SpectralResult) -> GapReport {
    let t = &r.spec;
    let c_est = r.cluster_values().iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    let next = r.next().unwrap_or(f64::INFINITY);
    let gap_target = 2.0 * t.p as f64 * t.mu0();
    GapReport {
        p: t.p,
        d_p: r.cluster,
        expected: t.expected_dimension().max(usize::from(t.p == 0)),
        c_est,
        next,
        gap_target,
        deficit: gap_target - next,
        dimension_ok: r.cluster == t.expected_dimension().max(usize::from(t.p == 0)),
        gap_ok: next > c_est && next > t.p as f64 * t.mu0(),
    }
}

/// B_{q,p}(x) = Σ_cluster λ^q |ψ(x)|² on the grid, for each q requested.
pub fn bergman_fields(r: &SpectralResult, qs: &[u32]) -> Vec<Vec<f64>> {
    let cell = r.spec.cell();
    let size = r.spec.n * r.spec.n;
    qs.iter()
        .map(|&q| {
            let mut f = vec![0.0; size];
            for (v, lam) in r.vectors.iter().zip(r.cluster_values()) {
                let w = lam.powi(q as i32) / cell;
                for (x, psi) in f.iter_mut().zip(v) {
                    *x += w * psi.norm_sqr();
                }
            }
            f
        })
        .collect()
}

/// ∫ f dv by the grid rule.
pub fn integrate(r: &SpectralResult, f: &[f64]) -> f64 {
    f.iter().sum::<f64>() * r.spec.cell()
}

/// Section value at an unwrapped lattice point, using the transition function
/// of the gauge when the point leaves the fundamental domain.
pub(crate) fn section_at(t: &TorusSpec, psi: &[Complex64], j: i64, k: i64) -> Complex64 {
    let n = t.n as i64;
    let (a, jj) = (j.div_euclid(n), j.rem_euclid(n));
    let (b, kk) = (k.div_euclid(n), k.rem_euclid(n));
    let (h1, h2) = t.h();
    let v = psi[(jj * n + kk) as usize];
    let bf = t.field();
    let phase = match t.gauge {
        Gauge::LandauY => bf * a as f64 * t.l1 * (k as f64 * h2),
        Gauge::LandauX => -bf * b as f64 * t.l2 * (j as f64 * h1),
    };
    v * Complex64::from_polar(1.0, phase)
}

/// χ with A − A_rad = dχ, where A_rad is the radial gauge centred at x0.
pub(crate) fn radial_chi(gauge: Gauge, b: f64, x: [f64; 2], x0: [f64; 2]) -> f64 {
    match gauge {
        Gauge::LandauY => 0.5 * b * (x[0] + x0[0]) * (x[1] - x0[1]),
        Gauge::LandauX => -0.5 * b * (x[1] + x0[1]) * (x[0] - x0[0]),
    }
}

/// P_{0,p}(x0 + Z, x0 + Z′) in the frame parallel along rays from x0, with
/// x0, Z, Z′ given as lattice offsets.
pub fn radial_kernel(r: &SpectralResult, x0: [i64; 2], z: [i64; 2], zp: [i64; 2]) -> Complex64 {
    let t = &r.spec;
    let (h1, h2) = t.h();
    let pos = |o: [i64; 2]| [(x0[0] + o[0]) as f64 * h1, (x0[1] + o[1]) as f64 * h2];
    let c = [x0[0] as f64 * h1, x0[1] as f64 * h2];
    let (xa, xb) = ([x0[0] + z[0], x0[1] + z[1]], [x0[0] + zp[0], x0[1] + zp[1]]);
    let mut k = Complex64::default();
    for v in &r.vectors {
        k += section_at(t, v, xa[0], xa[1]) * section_at(t, v, xb[0], xb[1]).conj();
    }
    let b = t.field();
    let phase = -radial_chi(t.gauge, b, pos(z), c) + radial_chi(t.gauge, b, pos(zp), c);
    k * Complex64::from_polar(1.0, phase) / t.cell()
}

#[derive(Clone, Debug, Serialize)]
pub struct DosMoment {
    pub q: u32,
    /// (1/d_p) Σ λ^q.
    pub trace: f64,
    /// (1/d_p) ∫ B_{q,p} dv.
    pub integral: f64,
    pub residual: f64,
}

/// Moments of the cluster spectral measure computed both ways.
pub fn dos_moments(r: &SpectralResult, q_max: u32) -> Vec<DosMoment> {
    let qs: Vec<u32> = (0..=q_max).collect();
    let fields = bergman_fields(r, &qs);
    let dp = r.cluster.max(1) as f64;
    qs.iter()
        .zip(&fields)
        .map(|(&q, f)| {
            let trace = r.cluster_values().iter().map(|l| l.powi(q as i32)).sum::<f64>() / dp;
            let integral = integrate(r, f) / dp;
            DosMoment { q, trace, integral, residual: (trace - integral).abs() / trace.abs().max(1.0) }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lanczos::dense_spectrum;
    use crate::torus::assemble_torus;

    fn solve(p: u32, n: usize, gauge: Gauge) -> SpectralResult {
        let t = TorusSpec::unit(p).with_grid(n).with_gauge(gauge);
        solve_torus(&t, &LanczosOptions::default()).unwrap()
    }

    #[test]
    fn cluster_has_riemann_roch_dimension() {
        let r = solve(8, 24, Gauge::LandauY);
        let g = gap_and_dimension(&r);
        assert_eq!(g.d_p, 8);
        assert!(g.dimension_ok && g.gap_ok, "{g:?}");
    }

    #[test]
    fn zero_power_cluster_is_the_constant() {
        let r = solve(0, 8, Gauge::LandauY);
        assert_eq!(r.cluster, 1);
        assert!(r.eigenvalues[0].abs() < 1e-9);
    }

    #[test]
    fn chain_route_matches_dense_full_grid() {
        let t = TorusSpec::unit(3).with_grid(16);
        let r = solve_torus(&t, &LanczosOptions::default()).unwrap();
        let d = dense_spectrum(&assemble_torus(&t).unwrap());
        for (a, b) in r.cluster_values().iter().zip(&d.values) {
            assert!((a - (b - t.tau_shift())).abs() < 1e-8, "{a} {b}");
        }
    }

    #[test]
    fn bergman_integrates_to_dimension() {
        let r = solve(4, 16, Gauge::LandauY);
        let b = bergman_fields(&r, &[0]);
        assert!((integrate(&r, &b[0]) - 4.0).abs() < 1e-9);
    }

    #[test]
    fn gauge_invariance() {
        let y = solve(5, 24, Gauge::LandauY);
        let x = solve(5, 24, Gauge::LandauX);
        for (a, b) in y.eigenvalues.iter().zip(&x.eigenvalues) {
            assert!((a - b).abs() < 1e-8, "{a} {b}");
        }
        let (by, bx) = (bergman_fields(&y, &[0, 1]), bergman_fields(&x, &[0, 1]));
        for q in 0..2 {
            let err = by[q].iter().zip(&bx[q]).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            assert!(err < 1e-7, "q={q} err={err}");
        }
    }

    #[test]
    fn trace_identity() {
        let r = solve(6, 24, Gauge::LandauY);
        for m in dos_moments(&r, 2) {
            assert!(m.residual < 1e-10, "{m:?}");
        }
    }

    #[test]
    fn radial_kernel_diagonal_is_bergman_density() {
        let r = solve(4, 16, Gauge::LandauX);
        let b = bergman_fields(&r, &[0]);
        let k = radial_kernel(&r, [3, 5], [0, 0], [0, 0]);
        assert!((k.re - b[0][3 * 16 + 5]).abs() < 1e-9 && k.im.abs() < 1e-9);
    }

    #[test]
    fn kernel_is_gauge_invariant_in_the_radial_frame() {
        let y = solve(5, 24, Gauge::LandauY);
        let x = solve(5, 24, Gauge::LandauX);
        for (z, zp) in [([1, 2], [-2, 0]), ([3, -1], [0, 2]), ([-30, 4], [2, 27])] {
            let a = radial_kernel(&y, [7, 11], z, zp);
            let b = radial_kernel(&x, [7, 11], z, zp);
            assert!((a - b).norm() < 1e-7, "{a} {b}");
        }
    }
}
