//! Closed forms used as independent checks on the residue engine.

use crate::error::{Error, Result};
use crate::jets::PointJets;
use crate::scalar::{Coeff, Mat, Scalar};
use crate::wick::{compose, inv_l0_perp, project_n, DiffOp, KernelPoly, ModelSpec};

/// F_{0,1} = −P^N𝒪₁ℒ₀⁻¹P^{N⊥} − P^{N⊥}ℒ₀⁻¹𝒪₁P^N.
pub fn f01_direct<C: Coeff>(m: &ModelSpec<C::S>, o1: &DiffOp<C>, one: C) -> Result<KernelPoly<C>> {
    let pn = KernelPoly::pn(m.n(), one);
    let right = inv_l0_perp(m, &o1.apply(m, &pn))?;
    let left = inv_l0_perp(m, &o1.adjoint(m).apply(m, &pn))?.adjoint();
    Ok(left.add(&right).neg())
}

/// (P^N𝒪₂P^N − P^N𝒪₁ℒ₀⁻¹P^{N⊥}𝒪₁P^N)^q P^N by direct composition.
pub fn f_q_2q<C: Coeff>(m: &ModelSpec<C::S>, o1: &DiffOp<C>, o2: &DiffOp<C>, one: C, q: usize) -> Result<KernelPoly<C>> {
    let pn = KernelPoly::pn(m.n(), one);
    let a = project_n(m, &o2.apply(m, &pn));
    let b = project_n(m, &o1.apply(m, &inv_l0_perp(m, &o1.apply(m, &pn))?));
    let step = a.sub(&b);
    let mut out = pn;
    for _ in 0..q {
        out = compose(m, &step, &out);
    }
    Ok(out)
}

/// −(X(0,0) + X(0,0)^*) with X = ℒ₀⁻¹P^{N⊥}𝒪₂P^N, in units of P^N(0,0).
/// Equals b_{0,1}/P^N(0,0) when (𝒪₁P^N)(Z,0) = 0, e.g. for Kähler jets.
pub fn b01_second_order_route<C: Coeff>(m: &ModelSpec<C::S>, o2: &DiffOp<C>, one: C) -> Result<C> {
    let zero = one.zero_like();
    let pn = KernelPoly::pn(m.n(), one);
    let x = inv_l0_perp(m, &o2.apply(m, &pn))?;
    let x0 = x.eval_at_origin().unwrap_or(zero);
    Ok(x0.add(&x0.adjoint()).neg())
}

fn require_kahler<S: Scalar>(j: &PointJets<S>) -> Result<()> {
    if j.kahler {
        Ok(())
    } else {
        Err(Error::NotKahler)
    }
}

/// b_{0,1} = (1/8π)[r^X + ¼|∇J|² + 2i Σ_j R^E(e_j, Je_j)].
pub fn closed_b01<S: Scalar>(j: &PointJets<S>) -> Result<Mat<S>> {
    require_kahler(j)?;
    let q = j.derived_quantities();
    let scalar = q.scalar_curvature.add(&q.nabla_j_sq.scale(&S::from_ratio(1, 4)));
    let two_i = S::imag_unit().scale(&S::from_i64(2));
    let m = Mat::scalar(j.rank, scalar).add(&j.re_trace_j().scale(&two_i));
    let eight_pi = S::pi()?.scale(&S::from_i64(8));
    Ok(m.scale(&eight_pi.inv()?))
}

/// |∇J|²/24 + (i/2)Σ_j R^E(e_j, Je_j) + Φ.
fn bq0_base<S: Scalar>(j: &PointJets<S>) -> Mat<S> {
    let q = j.derived_quantities();
    let half_i = S::imag_unit().scale(&S::from_ratio(1, 2));
    Mat::scalar(j.rank, q.rho).add(&j.re_trace_j().scale(&half_i)).add(&j.phi)
}

/// b_{q,0} = (|∇J|²/24 + (i/2)Σ_j R^E(e_j, Je_j) + Φ)^q.
pub fn closed_bq0<S: Scalar>(j: &PointJets<S>, q: usize) -> Result<Mat<S>> {
    require_kahler(j)?;
    let base = bq0_base(j);
    let mut out = Mat::identity(j.rank);
    for _ in 0..q {
        out = out.mul(&base);
    }
    Ok(out)
}

/// J_{1,2}(0,0) = |∇J|²/24 + 2Σ_i R^E(∂z_i, ∂z̄_i) + Φ.
pub fn closed_j12<S: Scalar>(j: &PointJets<S>) -> Result<Mat<S>> {
    require_kahler(j)?;
    let f = j.frame();
    let mut re = Mat::zeros(j.rank);
    for i in 0..j.n {
        re = re.add(&j.re_eval(&f.dz::<S>(i), &f.dzb::<S>(i)));
    }
    let q = j.derived_quantities();
    Ok(Mat::scalar(j.rank, q.rho).add(&re.scale(&S::from_i64(2))).add(&j.phi))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{int, PiRat};

    #[test]
    fn flat_closed_forms() {
        let two_pi = PiRat::pi().unwrap().scale(&int(2));
        let j = PointJets::flat(vec![two_pi], 1, true, int::<PiRat>(3)).unwrap();
        assert!(closed_b01(&j).unwrap().is_zero());
        assert_eq!(closed_bq0(&j, 2).unwrap(), Mat::scalar(1, int(9)));
        assert_eq!(closed_j12(&j).unwrap(), Mat::scalar(1, int(3)));
    }

    #[test]
    fn scalar_curvature_restriction() {
        // r^X/8π when R^E = 0 and ∇J = 0
        let two_pi = PiRat::pi().unwrap().scale(&int(2));
        let mut p = PointJets::flat(vec![two_pi], 1, true, PiRat::zero()).unwrap().parts();
        // round sphere type curvature ⟨R(e1,e2)e2,e1⟩ = 1 gives r^X = 2
        p.rtx[0b0110] = int(1);
        p.rtx[0b1001] = int(1);
        p.rtx[0b0101] = int(-1);
        p.rtx[0b1010] = int(-1);
        let j = PointJets::new(p).unwrap();
        assert!(j.validate().is_empty(), "{:?}", j.validate());
        assert_eq!(j.derived_quantities().scalar_curvature, int(2));
        let expect = int::<PiRat>(2).mul(&PiRat::pi().unwrap().scale(&int(8)).inv().unwrap());
        assert_eq!(closed_b01(&j).unwrap(), Mat::scalar(1, expect));
    }

    #[test]
    fn non_kahler_rejected() {
        let j = PointJets::flat(vec![int::<PiRat>(1)], 1, false, PiRat::zero()).unwrap();
        assert!(matches!(closed_b01(&j), Err(Error::NotKahler)));
    }
}
