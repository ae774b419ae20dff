//! `spectrum`, `bergman`, `dos` and `embed`: the numerical laboratory.

use std::path::PathBuf;

use bergman_core::expansion::Check;
use num_complex::Complex64;
use rayon::prelude::*;
use serde_json::json;
use speclab::cp1::{cp1_exact, Cp1Spec};
use speclab::csv::{fmt17, write_bergman, write_embed, write_fit, write_spectrum, BergmanRow};
use speclab::embed::{fs_pullback_grid, peak_section};
use speclab::fit::{fit_expansion, fit_exponent, interpolate_periodic};
use speclab::{bergman_fields, cache, dos_moments, gap_and_dimension, solve_torus, LanczosOptions, SpectralResult};

use crate::config::{Geometry, RunConfig};
use crate::error::{CliError, Result};
use crate::manifest::Artifacts;

/// Errors below this carry no decay information.
const EXPONENT_FLOOR: f64 = 1e-9;

fn cache_dir() -> Option<PathBuf> {
    std::env::var_os("BERGMAN_LAB_CACHE").filter(|v| !v.is_empty()).map(PathBuf::from)
}

/// One cluster per requested p, solved concurrently, through the cache when
/// one is configured.
pub fn solve_all(cfg: &RunConfig, seed: u64) -> Result<Vec<SpectralResult>> {
    let dir = cache_dir();
    let opts = LanczosOptions { seed, ..LanczosOptions::default() };
    cfg.sorted_powers()
        .par_iter()
        .map(|&p| {
            let t = cfg.torus(p);
            if let Some(d) = &dir {
                if let Some(r) = cache::load(d, &t)? {
                    return Ok(r);
                }
            }
            let r = solve_torus(&t, &opts)?;
            if let Some(d) = &dir {
                cache::store(d, &r)?;
            }
            Ok(r)
        })
        .collect()
}

fn buffer(f: impl FnOnce(&mut Vec<u8>) -> speclab::Result<()>) -> Result<Vec<u8>> {
    let mut v = Vec::new();
    f(&mut v)?;
    Ok(v)
}

pub fn spectrum(cfg: &RunConfig, seed: u64, art: &mut Artifacts) -> Result<Vec<Check>> {
    let results = art.timed("solve", |_| solve_all(cfg, seed))?;
    let mut rows = Vec::new();
    let mut reports = Vec::new();
    let mut checks = Vec::new();
    for r in &results {
        rows.extend(r.eigenvalues.iter().enumerate().map(|(i, v)| (r.p(), i, *v)));
        let g = gap_and_dimension(r);
        checks.push(Check { name: format!("p = {}: d_p = {}", r.p(), g.expected), ok: g.dimension_ok, defect: (g.d_p as f64 - g.expected as f64).abs() });
        checks.push(Check { name: format!("p = {}: next level above 2pμ₀ − C", r.p()), ok: g.gap_ok, defect: g.deficit.max(0.0) });
        reports.push(json!({ "grid": r.spec.n, "max_residual": r.max_residual, "gap": g }));
    }
    art.write("spectrum.csv", &buffer(|w| write_spectrum(w, &rows))?)?;
    art.write_json("spectrum.json", &json!({ "reports": reports, "checks": checks }))?;
    Ok(checks)
}

pub fn bergman(cfg: &RunConfig, seed: u64, art: &mut Artifacts) -> Result<Vec<Check>> {
    let ps = cfg.sorted_powers();
    let s = cfg.samples;
    let (rows, normalized) = match cfg.geometry {
        Geometry::Torus => {
            let results = art.timed("solve", |_| solve_all(cfg, seed))?;
            let mut rows = Vec::new();
            let mut normalized = Vec::new();
            for r in &results {
                let t = &r.spec;
                let n = t.n;
                let (h1, h2) = t.h();
                let f = bergman_fields(r, &[0, 1, 2]);
                for j in 0..n {
                    for k in 0..n {
                        let i = j * n + k;
                        rows.push(BergmanRow { p: t.p, x: [j as f64 * h1, k as f64 * h2], b: [f[0][i], f[1][i], f[2][i]] });
                    }
                }
                // common physical sample points for the fit, B per unit degree
                let scale = t.p as f64 * t.degree / t.area();
                normalized.push(
                    (0..s * s)
                        .map(|i| {
                            let (u, v) = ((i / s) as f64 * n as f64 / s as f64, (i % s) as f64 * n as f64 / s as f64);
                            interpolate_periodic(&f[0], n, u, v) / scale
                        })
                        .collect::<Vec<f64>>(),
                );
            }
            (rows, normalized)
        }
        Geometry::Cp1 => {
            // the cluster of Δ_p − pτ on holomorphic sections sits at 0, so
            // B₁ and B₂ vanish identically
            let pts = chart_points(s);
            let mut rows = Vec::new();
            let mut normalized = Vec::new();
            for &p in &ps {
                let c = cp1_exact(&Cp1Spec { p });
                let b: Vec<f64> = pts.iter().map(|w| c.bergman(*w)).collect();
                rows.extend(pts.iter().zip(&b).map(|(w, v)| BergmanRow { p, x: [w.re, w.im], b: [*v, 0.0, 0.0] }));
                normalized.push(b.iter().map(|v| v / p as f64).collect());
            }
            (rows, normalized)
        }
    };
    art.write("bergman.csv", &buffer(|w| write_bergman(w, &rows))?)?;

    let psf: Vec<f64> = ps.iter().map(|&p| p as f64).collect();
    let sup: Vec<f64> = normalized.iter().map(|f| f.iter().map(|v| (v - 1.0).abs()).fold(0.0, f64::max)).collect();
    let exponent = fit_exponent(&psf, &sup, EXPONENT_FLOOR);
    let fit = if ps.len() >= cfg.order + 2 {
        let fit = fit_expansion(&psf, &normalized, cfg.order)?;
        art.write("fit.csv", &buffer(|w| write_fit(w, &fit))?)?;
        Some(fit)
    } else {
        None
    };
    art.write_json("fit.json", &json!({ "p": ps, "sup_deviation": sup, "exponent": exponent, "fit": fit }))?;
    Ok(Vec::new())
}

/// s×s points of the affine chart in [−2, 2]².
fn chart_points(s: usize) -> Vec<Complex64> {
    let step = if s > 1 { 4.0 / (s - 1) as f64 } else { 0.0 };
    (0..s * s).map(|i| Complex64::new(-2.0 + (i / s) as f64 * step, -2.0 + (i % s) as f64 * step)).collect()
}

pub fn dos(cfg: &RunConfig, seed: u64, art: &mut Artifacts) -> Result<Vec<Check>> {
    let results = art.timed("solve", |_| solve_all(cfg, seed))?;
    let mut w = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| CliError::Io(e.to_string());
    w.write_record(["p", "q", "trace", "integral", "residual"]).map_err(io)?;
    let mut checks = Vec::new();
    let mut first = Vec::new();
    for r in &results {
        for m in dos_moments(r, 2) {
            w.write_record([r.p().to_string(), m.q.to_string(), fmt17(m.trace), fmt17(m.integral), fmt17(m.residual)]).map_err(io)?;
            checks.push(Check { name: format!("p = {}, q = {}: trace identity", r.p(), m.q), ok: m.residual <= 1e-8, defect: m.residual });
            if m.q == 1 {
                first.push(m.trace.abs());
            }
        }
    }
    art.write("dos.csv", &w.into_inner().map_err(|e| CliError::Io(e.to_string()))?)?;
    let psf: Vec<f64> = results.iter().map(|r| r.p() as f64).collect();
    let exponent = fit_exponent(&psf, &first, EXPONENT_FLOOR);
    art.write_json("dos.json", &json!({ "p": psf, "first_moment": first, "exponent": exponent, "checks": checks }))?;
    Ok(checks)
}

pub fn embed(cfg: &RunConfig, seed: u64, art: &mut Artifacts) -> Result<Vec<Check>> {
    let ps = cfg.sorted_powers();
    let mut sup = Vec::new();
    let mut peaks = Vec::new();
    match cfg.geometry {
        Geometry::Torus => {
            let results = art.timed("solve", |_| solve_all(cfg, seed))?;
            art.timed("pullback", |_| {
                for r in &results {
                    let stride = (r.spec.n / cfg.samples).max(1);
                    sup.push(fs_pullback_grid(r, stride)?.sup_error);
                    let radius = (r.p() as f64).powf(-0.25);
                    let pk = peak_section(r, [0, 0], radius)?;
                    peaks.push(json!({ "p": r.p(), "radius": radius, "complement": 1.0 - pk.mass / pk.norm, "report": pk }));
                }
                Ok(())
            })?;
        }
        Geometry::Cp1 => {
            let pts = chart_points(cfg.samples);
            for &p in &ps {
                let c = cp1_exact(&Cp1Spec { p });
                sup.push(pts.iter().map(|w| (c.fs_pullback_ratio(*w) - 1.0).abs()).fold(0.0, f64::max));
                let radius = (p as f64).powf(-0.25);
                peaks.push(json!({
                    "p": p,
                    "radius": radius,
                    "complement": c.peak_complement_closed(radius),
                    "quadrature": c.peak_complement(radius, 4000),
                }));
            }
        }
    }
    let rows: Vec<(u32, f64)> = ps.iter().copied().zip(sup.iter().copied()).collect();
    art.write("embed.csv", &buffer(|w| write_embed(w, &rows))?)?;
    let psf: Vec<f64> = ps.iter().map(|&p| p as f64).collect();
    let exponent = fit_exponent(&psf, &sup, EXPONENT_FLOOR);
    art.write_json("embed.json", &json!({ "p": ps, "sup_error": sup, "exponent": exponent, "peaks": peaks }))?;
    Ok(Vec::new())
}
