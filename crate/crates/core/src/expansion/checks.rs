//! Identity and structure checks on the computed kernels, as reportable
//! pass/fail records.

use serde::Serialize;

use super::{b_coeff, check_degree, closed_b01, closed_bq0, f_q_2q, jet_operators, origin_value, Engine};
use crate::error::{Error, Result};
use crate::jets::{closed_o2_pn, PointJets};
use crate::scalar::{Coeff, Mat, Scalar};
use crate::wick::{project_n, KernelPoly};

#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub name: String,
    pub ok: bool,
    /// Size of the discrepancy; 0 for exact agreement.
    pub defect: f64,
}

impl Check {
    fn exact(name: impl Into<String>, ok: bool) -> Self {
        Check { name: name.into(), ok, defect: if ok { 0.0 } else { f64::INFINITY } }
    }
}

fn kernel_defect<C: Coeff>(a: &KernelPoly<C>, b: &KernelPoly<C>) -> f64 {
    let d = a.sub(b);
    d.poly.terms.values().map(Coeff::magnitude).fold(0.0, f64::max)
}

fn kernels_agree<C: Coeff>(name: String, a: &KernelPoly<C>, b: &KernelPoly<C>) -> Check {
    let defect = kernel_defect(a, b);
    Check { name, ok: a == b || (defect <= 1e-10 && !<C::S as Scalar>::EXACT), defect }
}

/// Relative agreement of two coefficient matrices: exact in exact modes,
/// within `rel` otherwise.
pub fn matrices_agree<S: Scalar>(name: String, a: &Mat<S>, b: &Mat<S>, rel: f64) -> Check {
    let defect = a.sub(b).magnitude() / b.magnitude().max(1.0);
    let ok = if S::EXACT { a == b } else { defect <= rel };
    Check { name, ok, defect }
}

/// P^N𝒪₁P^N = 0, F_{0,0} = P^N, F_{q,r} = 0 for r < 2q (q = 1, 2),
/// F_{q,2q} against the closed composition (q = 1, 2), and 𝒪₂P^N against its
/// closed form.
pub fn identity_checks<S: Scalar>(j: &PointJets<S>) -> Result<Vec<Check>> {
    let m = j.model()?;
    let ops = jet_operators(j)?;
    let (o1, o2) = match (&ops[0], &ops[1]) {
        (Some(a), Some(b)) => (a, b),
        _ => return Err(Error::MissingOperator(1)),
    };
    let one = Mat::identity(j.rank);
    let pn = KernelPoly::pn(j.n, one.clone());
    let engine = Engine::new(&m, &ops, one.clone(), 4);
    let mut out = vec![Check::exact("PN O1 PN = 0", project_n(&m, &o1.apply(&m, &pn)).is_zero())];
    out.push(kernels_agree("F00 = PN".into(), &engine.f(0, 0)?, &pn));
    for q in 1..=2 {
        for r in 0..2 * q {
            out.push(Check::exact(format!("F{q}{r} = 0"), engine.f(q, r)?.is_zero()));
        }
        let closed = f_q_2q(&m, o1, o2, one.clone(), q)?;
        out.push(kernels_agree(format!("F{q}{} = closed composition", 2 * q), &engine.f(q, 2 * q)?, &closed));
    }
    out.push(kernels_agree("O2 PN = closed form".into(), &o2.apply(&m, &pn), &closed_o2_pn(j)?));
    Ok(out)
}

/// Self-adjointness and the degree/parity bound of every F_{q,r} with
/// q ≤ q_max, r ≤ r_max; pole-order bounds of the series; and in Kähler mode
/// J_{q,2q}(0,0) = J_{1,2}(0,0)^q with balanced z, z̄′ degrees.
pub fn structure_checks<S: Scalar>(j: &PointJets<S>, q_max: usize, r_max: usize) -> Result<Vec<Check>> {
    let m = j.model()?;
    let ops = jet_operators(j)?;
    let one = Mat::identity(j.rank);
    let engine = Engine::new(&m, &ops, one.clone(), r_max);
    let mut out = Vec::new();
    for q in 0..=q_max {
        for r in 2 * q..=r_max {
            let f = match engine.f(q, r) {
                Ok(f) => f,
                Err(Error::MissingOperator(_)) => continue,
                Err(e) => return Err(e),
            };
            out.push(kernels_agree(format!("F{q}{r} self-adjoint"), &f.adjoint(), &f));
            out.push(Check::exact(format!("F{q}{r} degree <= {} with parity {}", 3 * r, r % 2), check_degree(&f, r).is_ok()));
        }
    }
    let series = super::compute_series(&m, &ops, one.clone(), r_max.min(2))?;
    for d in &series.diagnostics {
        out.push(Check::exact(
            format!("pole orders at r = {}: {} <= {}, {} <= {}", d.r, d.g_order, d.g_bound, d.perp_order, d.perp_bound),
            d.g_order <= d.g_bound && d.perp_order <= d.perp_bound,
        ));
    }
    if j.kahler && r_max >= 2 {
        let zero = Mat::zeros(j.rank);
        let f12 = engine.f(1, 2)?;
        let j12 = origin_value(&f12, &zero);
        for q in 1..=q_max.min(r_max / 2) {
            let f = engine.f(q, 2 * q)?;
            let bal = f.degrees().all(|d| d[1] == d[4]);
            out.push(Check::exact(format!("J{q}{} balanced in z and zbar'", 2 * q), bal));
            if q >= 2 {
                let power = (1..q).fold(j12.clone(), |acc, _| acc.mul(&j12));
                out.push(matrices_agree(format!("J{q}{}(0,0) = J12(0,0)^{q}", 2 * q), &origin_value(&f, &zero), &power, 1e-8));
            }
        }
    }
    Ok(out)
}

/// b_{0,1} and b_{q,0} (q = 1..=q_max) from the engine against their closed
/// forms, on Kähler jets.
pub fn coefficient_checks<S: Scalar>(j: &PointJets<S>, q_max: usize) -> Result<Vec<Check>> {
    let mut out = vec![matrices_agree("b01 = closed form".into(), &b_coeff(j, 0, 1)?, &closed_b01(j)?, 1e-8)];
    for q in 1..=q_max {
        out.push(matrices_agree(format!("b{q}0 = closed form"), &b_coeff(j, q, 0)?, &closed_bq0(j, q)?, 1e-8));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::jets::random_jets;
    use crate::scalar::{PiRat, Rat, C64};

    #[test]
    fn identities_hold_on_random_jets() {
        let j: PointJets<Rat> = random_jets(1, 2, 4, false).unwrap();
        let c = identity_checks(&j).unwrap();
        assert!(c.iter().all(|c| c.ok), "{c:?}");
        assert_eq!(c.len(), 11);
    }

    #[test]
    fn structure_on_kahler_jets() {
        let j: PointJets<PiRat> = random_jets(1, 1, 2, true).unwrap();
        let c = structure_checks(&j, 3, 6).unwrap();
        assert!(c.iter().all(|c| c.ok), "{c:?}");
        assert!(c.iter().any(|c| c.name.starts_with("J36(0,0)")));
    }

    #[test]
    fn float_mode_reports_relative_defect() {
        let j: PointJets<C64> = random_jets(1, 1, 9, true).unwrap();
        let c = coefficient_checks(&j, 2).unwrap();
        assert!(c.iter().all(|c| c.ok && c.defect < 1e-8), "{c:?}");
    }

    #[test]
    fn a_wrong_matrix_fails() {
        let a: Mat<Rat> = Mat::identity(2);
        assert!(!matrices_agree("x".into(), &a, &a.add(&a), 1e-8).ok);
    }
}
