//! Grid solutions against the theta-series basis and the ℂP¹ closed forms.

use num_complex::Complex64;
use speclab::cp1::{cp1_exact, Cp1Spec};
use speclab::fit::{fit_expansion, interpolate_periodic};
use speclab::spectral::radial_kernel;
use speclab::theta::ThetaOracle;
use speclab::{bergman_fields, solve_torus, LanczosOptions, TorusSpec};

#[test]
fn theta_and_lanczos_bergman_diagonals_agree() {
    for p in [8, 12, 16] {
        let t = TorusSpec::unit(p);
        let r = solve_torus(&t, &LanczosOptions::default()).unwrap();
        let o = ThetaOracle::new(&t).unwrap();
        let b = &bergman_fields(&r, &[0])[0];
        let (h1, h2) = t.h();
        let n = t.n;
        let mut sup: f64 = 0.0;
        for j in 0..n {
            for k in (0..n).step_by(2) {
                sup = sup.max((b[j * n + k] - o.bergman([j as f64 * h1, k as f64 * h2])).abs());
            }
        }
        assert!(sup <= 1e-3 * p as f64, "p = {p}: {sup}");
    }
}

#[test]
fn theta_and_grid_kernels_agree_near_the_diagonal() {
    // p⁻¹P_{0,p} in the radial frame; the gap closes like the grid error
    let mut last = f64::INFINITY;
    for p in [8, 16, 32] {
        let t = TorusSpec::unit(p);
        let r = solve_torus(&t, &LanczosOptions::default()).unwrap();
        let o = ThetaOracle::new(&t).unwrap();
        let (h1, h2) = t.h();
        let x0 = [(t.n / 3) as i64, (t.n / 2) as i64];
        let c = [x0[0] as f64 * h1, x0[1] as f64 * h2];
        let phys = |z: [i64; 2]| [z[0] as f64 * h1, z[1] as f64 * h2];
        let offsets = [[0, 0], [1, 0], [0, -2], [-2, 1], [3, 2]];
        let mut sup: f64 = 0.0;
        for z in offsets {
            for zp in offsets {
                let d = radial_kernel(&r, x0, z, zp) - o.radial_kernel(c, phys(z), phys(zp));
                sup = sup.max(d.norm() / p as f64);
            }
        }
        assert!(sup < 1e-3 && sup < last, "p = {p}: {sup}");
        last = sup;
    }
}

#[test]
fn cp1_two_term_fit_is_exact() {
    let ps = [8.0, 12.0, 16.0, 24.0, 32.0, 48.0];
    let ws = [Complex64::new(0.0, 0.0), Complex64::new(0.5, -0.3), Complex64::new(-2.0, 1.0)];
    let fields: Vec<Vec<f64>> = ps
        .iter()
        .map(|&p| {
            let c = cp1_exact(&Cp1Spec { p: p as u32 });
            ws.iter().map(|&w| c.bergman(w) / p).collect()
        })
        .collect();
    let fit = fit_expansion(&ps, &fields, 1).unwrap();
    assert!((fit.coefficients[0] - 1.0).abs() < 1e-10, "{fit:?}");
    assert!((fit.coefficients[1] - 1.0).abs() < 1e-10, "{fit:?}");
    assert!(fit.residuals.iter().all(|r| *r < 1e-10));
}

#[test]
fn flat_torus_fit_has_no_first_correction() {
    let ps = [8.0, 12.0, 16.0, 24.0];
    let fields: Vec<Vec<f64>> = ps
        .iter()
        .map(|&p| {
            let t = TorusSpec::unit(p as u32);
            let r = solve_torus(&t, &LanczosOptions::default()).unwrap();
            let b = &bergman_fields(&r, &[0])[0];
            let n = t.n as f64;
            // common physical sample points across grids
            (0..25).map(|i| interpolate_periodic(b, t.n, (i % 5) as f64 * 0.2 * n, (i / 5) as f64 * 0.2 * n) / p).collect()
        })
        .collect();
    let fit = fit_expansion(&ps, &fields, 1).unwrap();
    assert!((fit.coefficients[0] - 1.0).abs() < 1e-3, "{fit:?}");
    assert!(fit.coefficients[1].abs() < 1e-2, "{fit:?}");
}
