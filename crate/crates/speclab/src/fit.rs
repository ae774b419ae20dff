//! Least-squares fits of p-sequences.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{Result, SpecError};

/// Default tensor powers for fits.
pub const DEFAULT_PS: [u32; 6] = [8, 12, 16, 24, 32, 48];

#[derive(Clone, Debug, Serialize)]
pub struct LsqFit {
    pub coefficients: Vec<f64>,
    pub stderr: Vec<f64>,
    /// max |y − model| over the data.
    pub max_residual: f64,
}

/// Weighted least squares y ≈ Σ_r c_r x_r with weights w on squared residuals.
fn weighted_lsq(rows: &[Vec<f64>], ys: &[f64], ws: &[f64]) -> Result<LsqFit> {
    let (m, k) = (rows.len(), rows.first().map_or(0, Vec::len));
    if m < k + 1 {
        return Err(SpecError::IllConditioned(format!("{m} data points for {k} coefficients")));
    }
    let a = DMatrix::from_fn(m, k, |i, j| rows[i][j] * ws[i].sqrt());
    let b = DVector::from_fn(m, |i, _| ys[i] * ws[i].sqrt());
    let ata = a.transpose() * &a;
    let chol = ata
        .clone()
        .cholesky()
        .ok_or_else(|| SpecError::IllConditioned("normal matrix is not positive definite".into()))?;
    let sv = ata.singular_values();
    let cond = sv.max() / sv.min();
    if !cond.is_finite() || cond > 1e14 {
        return Err(SpecError::IllConditioned(format!("condition number {cond:e}")));
    }
    let c = chol.solve(&(a.transpose() * &b));
    let weighted: Vec<f64> = (0..m).map(|i| b[i] - (a.row(i) * &c)[0]).collect();
    let dof = (m - k) as f64;
    let sigma2 = weighted.iter().map(|r| r * r).sum::<f64>() / dof;
    let inv = chol.inverse();
    let stderr = (0..k).map(|j| (sigma2 * inv[(j, j)]).max(0.0).sqrt()).collect();
    let max_residual = (0..m)
        .map(|i| (ys[i] - rows[i].iter().zip(c.iter()).map(|(x, y)| x * y).sum::<f64>()).abs())
        .fold(0.0, f64::max);
    Ok(LsqFit { coefficients: c.iter().copied().collect(), stderr, max_residual })
}

/// y(p) ≈ Σ_{r=0}^{k} b_r p^{−r}, weighted by p^{k+1}.
pub fn fit_powers(ps: &[f64], ys: &[f64], k: usize) -> Result<LsqFit> {
    if ps.len() < k + 2 {
        return Err(SpecError::IllConditioned(format!("need at least {} values of p, have {}", k + 2, ps.len())));
    }
    let rows: Vec<Vec<f64>> = ps.iter().map(|p| (0..=k).map(|r| p.powi(-(r as i32))).collect()).collect();
    let ws: Vec<f64> = ps.iter().map(|p| p.powi(k as i32 + 1)).collect();
    weighted_lsq(&rows, ys, &ws)
}

#[derive(Clone, Debug, Serialize)]
pub struct ExpansionFit {
    /// Mean over sample points of each fitted coefficient.
    pub coefficients: Vec<f64>,
    /// Largest standard error over sample points.
    pub stderr: Vec<f64>,
    /// Largest spread of a coefficient across sample points.
    pub spread: Vec<f64>,
    /// sup over sample points of |p^{−n}B − model| for each p.
    pub residuals: Vec<f64>,
}

/// Pointwise fits of p^{−n}B_p(x) in powers of 1/p. `fields[i][x]` holds
/// p_i^{−n}B_{p_i} at sample point x.
pub fn fit_expansion(ps: &[f64], fields: &[Vec<f64>], k: usize) -> Result<ExpansionFit> {
    let npts = fields.first().map_or(0, Vec::len);
    if fields.iter().any(|f| f.len() != npts) {
        return Err(SpecError::InvalidSpec("fields sampled at different points".into()));
    }
    let fits: Vec<LsqFit> = (0..npts)
        .map(|x| fit_powers(ps, &fields.iter().map(|f| f[x]).collect::<Vec<_>>(), k))
        .collect::<Result<_>>()?;
    let mut coefficients = vec![0.0; k + 1];
    let mut stderr = vec![0.0_f64; k + 1];
    let mut lo = vec![f64::INFINITY; k + 1];
    let mut hi = vec![f64::NEG_INFINITY; k + 1];
    for f in &fits {
        for r in 0..=k {
            coefficients[r] += f.coefficients[r] / npts as f64;
            stderr[r] = stderr[r].max(f.stderr[r]);
            lo[r] = lo[r].min(f.coefficients[r]);
            hi[r] = hi[r].max(f.coefficients[r]);
        }
    }
    let residuals = ps
        .iter()
        .enumerate()
        .map(|(i, p)| {
            fits.iter()
                .enumerate()
                .map(|(x, f)| {
                    let model: f64 = f.coefficients.iter().enumerate().map(|(r, c)| c * p.powi(-(r as i32))).sum();
                    (fields[i][x] - model).abs()
                })
                .fold(0.0, f64::max)
        })
        .collect();
    let spread = hi.iter().zip(&lo).map(|(h, l)| h - l).collect();
    Ok(ExpansionFit { coefficients, stderr, spread, residuals })
}

#[derive(Clone, Debug, Serialize)]
pub struct PowerFit {
    pub exponent: f64,
    pub prefactor: f64,
    pub stderr: f64,
}

/// err ≈ C p^α by least squares in log–log coordinates. None when some
/// error is not above `floor`, where the exponent carries no information.
pub fn fit_exponent(ps: &[f64], errs: &[f64], floor: f64) -> Option<PowerFit> {
    if ps.len() < 3 || errs.iter().any(|&e| !(e > floor) || !e.is_finite()) {
        return None;
    }
    let rows: Vec<Vec<f64>> = ps.iter().map(|p| vec![1.0, p.ln()]).collect();
    let ys: Vec<f64> = errs.iter().map(|e| e.ln()).collect();
    let fit = weighted_lsq(&rows, &ys, &vec![1.0; ps.len()]).ok()?;
    Some(PowerFit { exponent: fit.coefficients[1], prefactor: fit.coefficients[0].exp(), stderr: fit.stderr[1] })
}

/// Bilinear interpolation of a periodic N×N grid field (index j·N + k) at
/// fractional grid coordinates.
pub fn interpolate_periodic(field: &[f64], n: usize, u: f64, v: f64) -> f64 {
    let (fu, fv) = (u.floor(), v.floor());
    let (du, dv) = (u - fu, v - fv);
    let at = |j: i64, k: i64| field[(j.rem_euclid(n as i64) * n as i64 + k.rem_euclid(n as i64)) as usize];
    let (j, k) = (fu as i64, fv as i64);
    at(j, k) * (1.0 - du) * (1.0 - dv) + at(j + 1, k) * du * (1.0 - dv) + at(j, k + 1) * (1.0 - du) * dv + at(j + 1, k + 1) * du * dv
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn synthetic_linear_sequence() {
        // B = 2p − 3 gives p^{−1}B = 2 − 3/p
        let ps: Vec<f64> = DEFAULT_PS.iter().map(|&p| p as f64).collect();
        let ys: Vec<f64> = ps.iter().map(|p| (2.0 * p - 3.0) / p).collect();
        let f = fit_powers(&ps, &ys, 1).unwrap();
        assert!((f.coefficients[0] - 2.0).abs() < 1e-12 && (f.coefficients[1] + 3.0).abs() < 1e-10);
        assert!(f.max_residual < 1e-12);
    }

    #[test]
    fn too_few_points() {
        assert!(matches!(fit_powers(&[8.0, 12.0], &[1.0, 1.0], 1), Err(SpecError::IllConditioned(_))));
    }

    #[test]
    fn exponent_of_a_power_law() {
        let ps = [8.0, 16.0, 32.0];
        let f = fit_exponent(&ps, &ps.map(|p| 3.0 / p), 0.0).unwrap();
        assert!((f.exponent + 1.0).abs() < 1e-12 && (f.prefactor - 3.0).abs() < 1e-10);
        assert!(fit_exponent(&ps, &[1e-3, 0.0, 1e-4], 1e-12).is_none());
    }

    #[test]
    fn interpolation_reproduces_grid_values() {
        let f: Vec<f64> = (0..16).map(|i| i as f64).collect();
        assert_eq!(interpolate_periodic(&f, 4, 1.0, 2.0), 6.0);
        assert_eq!(interpolate_periodic(&f, 4, 4.0, -1.0), 3.0);
        assert!((interpolate_periodic(&f, 4, 1.5, 2.0) - 8.0).abs() < 1e-12);
    }

    proptest! {
        #[test]
        fn exact_two_term_sequences_are_recovered(b0 in -5.0..5.0f64, b1 in -5.0..5.0f64) {
            let ps: Vec<f64> = DEFAULT_PS.iter().map(|&p| p as f64).collect();
            let ys: Vec<f64> = ps.iter().map(|p| b0 + b1 / p).collect();
            let f = fit_powers(&ps, &ys, 1).unwrap();
            prop_assert!((f.coefficients[0] - b0).abs() < 1e-9);
            prop_assert!((f.coefficients[1] - b1).abs() < 1e-8);
        }
    }
}
