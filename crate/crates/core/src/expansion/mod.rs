//! Residue extraction of F_{q,r} and the coefficients b_{q,r}.

pub mod checks;
pub mod closed;
pub mod engine;
pub mod series;

pub use checks::{coefficient_checks, identity_checks, structure_checks, Check};
pub use closed::{b01_second_order_route, closed_b01, closed_bq0, closed_j12, f01_direct, f_q_2q};
pub use engine::{compute_f, Engine};
pub use series::{compute_series, residue_kernel, PoleDiagnostic, SeriesTerms};

use std::collections::BTreeMap;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::jets::{build_o1, build_o2, MatOp, PointJets};
use crate::scalar::{Coeff, Mat, Scalar};
use crate::wick::{KernelPoly, ModelSpec};

/// [Some(𝒪₁), Some(𝒪₂)] built from jets.
pub fn jet_operators<S: Scalar>(j: &PointJets<S>) -> Result<Vec<Option<MatOp<S>>>> {
    Ok(vec![Some(build_o1(j)?), Some(build_o2(j)?)])
}

/// Every monomial has total degree ≤ 3r with the parity of r.
pub fn check_degree<C: Coeff>(k: &KernelPoly<C>, r: usize) -> Result<()> {
    for d in k.degrees() {
        if d[0] > 3 * r || d[0] % 2 != r % 2 {
            return Err(Error::DegreeBound { degree: d[0], bound: 3 * r });
        }
    }
    Ok(())
}

/// F(0,0) in units of P^N(0,0).
pub fn origin_value<C: Coeff>(k: &KernelPoly<C>, zero: &C) -> C {
    k.eval_at_origin().unwrap_or_else(|| zero.clone())
}

/// b_{q,r} = F_{q,2r+2q}(0,0). Needs a mode in which P^N(0,0) = Πa/(2π)^n
/// is representable.
pub fn b_coeff<S: Scalar>(j: &PointJets<S>, q: usize, r: usize) -> Result<Mat<S>> {
    let m = j.model()?;
    let ops = jet_operators(j)?;
    let f = compute_f(&m, &ops, Mat::identity(j.rank), q, 2 * r + 2 * q)?;
    Ok(origin_value(&f, &Mat::zeros(j.rank)).scale(&m.pn_origin()?))
}

/// Computed kernels and coefficients for one set of jets.
#[derive(Clone, Debug)]
pub struct ExpansionReport<S: Scalar> {
    pub model: ModelSpec<S>,
    pub ops: Vec<Option<MatOp<S>>>,
    /// F_{q,r} for every computed pair.
    pub f: BTreeMap<(usize, usize), KernelPoly<Mat<S>>>,
    /// b_{q,r} = F_{q,2r+2q}(0,0), when P^N(0,0) is representable.
    pub b: BTreeMap<(usize, usize), Mat<S>>,
    pub diagnostics: Vec<PoleDiagnostic>,
}

impl<S: Scalar> ExpansionReport<S> {
    /// F_{q,r} for q ≤ q_max and r ≤ r_max, with degree and self-adjointness
    /// guards. Pairs needing an operator beyond 𝒪₂ are skipped.
    pub fn build(j: &PointJets<S>, q_max: usize, r_max: usize, with_series: bool) -> Result<Self> {
        let model = j.model()?;
        let ops = jet_operators(j)?;
        let one = Mat::identity(j.rank);
        let engine = Engine::new(&model, &ops, one.clone(), r_max);
        let mut f = BTreeMap::new();
        for q in 0..=q_max {
            for r in 0..=r_max {
                let k = match engine.f(q, r) {
                    Ok(k) => k,
                    Err(Error::MissingOperator(_)) => continue,
                    Err(e) => return Err(e),
                };
                check_degree(&k, r)?;
                if !k.adjoint().approx_eq(&k) {
                    return Err(Error::Inconsistent(format!("F_({q},{r}) is not self-adjoint")));
                }
                f.insert((q, r), k);
            }
        }
        let mut b = BTreeMap::new();
        if let Ok(pn0) = model.pn_origin() {
            for (&(q, r), k) in &f {
                if r >= 2 * q && (r - 2 * q) % 2 == 0 {
                    b.insert((q, (r - 2 * q) / 2), origin_value(k, &Mat::zeros(j.rank)).scale(&pn0));
                }
            }
        }
        let diagnostics = if with_series {
            let avail = r_max.min(2);
            compute_series(&model, &ops, one, avail)?.diagnostics
        } else {
            Vec::new()
        };
        Ok(ExpansionReport { model, ops, f, b, diagnostics })
    }
}

/// Σ_{r=2q}^{k} F_{q,r}(√p Z, √p Z') p^{q − r/2} for scalar kernels
/// (κ ≡ 1), the prediction for p^{−n}P_{q,p}(Z, Z').
pub fn near_diagonal_kernel<S: Scalar>(
    a: &[f64],
    f: &BTreeMap<(usize, usize), KernelPoly<S>>,
    q: usize,
    k: usize,
    z: &[f64],
    zp: &[f64],
    p: f64,
) -> Complex64 {
    let sp = p.sqrt();
    let zs: Vec<f64> = z.iter().map(|x| x * sp).collect();
    let zps: Vec<f64> = zp.iter().map(|x| x * sp).collect();
    let mut total = Complex64::new(0.0, 0.0);
    for r in 2 * q..=k {
        if let Some(kr) = f.get(&(q, r)) {
            total += kr.eval(a, &zs, &zps) * p.powf(q as f64 - r as f64 / 2.0);
        }
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::jets::random_jets;
    use crate::scalar::{PiRat, Rat};

    #[test]
    fn leading_coefficient_is_root_of_det() {
        let j: PointJets<PiRat> = random_jets(2, 1, 1, false).unwrap();
        let b = b_coeff(&j, 0, 0).unwrap();
        let m = j.model().unwrap();
        assert_eq!(b, Mat::scalar(1, m.pn_origin().unwrap()));
    }

    #[test]
    fn rational_mode_cannot_normalize() {
        let j: PointJets<Rat> = random_jets(1, 1, 1, false).unwrap();
        assert!(matches!(b_coeff(&j, 0, 0), Err(Error::PiUnavailable)));
    }

    #[test]
    fn kahler_b01_matches_closed_form() {
        for seed in 0..3 {
            let j: PointJets<PiRat> = random_jets(2, 1, seed, true).unwrap();
            assert_eq!(b_coeff(&j, 0, 1).unwrap(), closed_b01(&j).unwrap(), "seed={seed}");
        }
    }

    #[test]
    fn kahler_bq0_matches_closed_form() {
        let j: PointJets<PiRat> = random_jets(2, 2, 5, true).unwrap();
        for q in 1..=2 {
            assert_eq!(b_coeff(&j, q, 0).unwrap(), closed_bq0(&j, q).unwrap(), "q={q}");
        }
    }

    #[test]
    fn report_guards_hold() {
        let j: PointJets<Rat> = random_jets(1, 1, 3, false).unwrap();
        let rep = ExpansionReport::build(&j, 1, 2, true).unwrap();
        assert_eq!(rep.f[&(0, 0)], KernelPoly::pn(1, Mat::identity(1)));
        assert!(rep.f[&(1, 1)].is_zero());
        assert!(rep.b.is_empty());
        assert_eq!(rep.diagnostics[2].g_order, 2);
    }
}
