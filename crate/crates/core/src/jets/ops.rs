//! The Taylor coefficients 𝒪₁, 𝒪₂ of the rescaled operator as ladder
//! operators, and the closed form of 𝒪₂P^N.

use super::frame::{contract, FrameMap};
use super::point::PointJets;
use crate::error::{Error, Result};
use crate::poly::Poly;
use crate::scalar::{Coeff, Mat, Scalar};
use crate::wick::{l0, DiffOp, Gen, KernelPoly, ModelSpec};

pub type MatOp<S> = DiffOp<Mat<S>>;

/// ∇_{e_i} + ½R^L(ℛ, e_i) on the model: −½(b_j − b⁺_j) for i = 2j and
/// −(i/2)(b_j + b⁺_j) for i = 2j + 1.
pub fn nabla0<C: Coeff>(n: usize, i: usize, one: C) -> DiffOp<C> {
    let j = i / 2;
    let b = DiffOp::generator(n, Gen::B(j), one.clone());
    let bp = DiffOp::generator(n, Gen::Bp(j), one);
    let half = C::S::from_ratio(1, 2);
    if i % 2 == 0 {
        bp.sub(&b).scale(&half)
    } else {
        b.add(&bp).scale(&C::S::imag_unit().mul(&half).neg())
    }
}

/// Shared context: model, frame and the polynomial vectors used in contractions.
struct Ctx<'a, S: Scalar> {
    j: &'a PointJets<S>,
    m: ModelSpec<S>,
    d: usize,
    r: Vec<Poly<S>>,
    f: FrameMap,
}

impl<'a, S: Scalar> Ctx<'a, S> {
    fn new(j: &'a PointJets<S>) -> Result<Self> {
        let bad = j.validate();
        if !bad.is_empty() {
            return Err(Error::InvalidJets(bad));
        }
        let f = j.frame();
        Ok(Ctx { j, m: j.model()?, d: j.dim(), r: f.radial(), f })
    }

    fn e(&self, i: usize) -> Vec<Poly<S>> {
        let mut v = vec![S::zero(); self.d];
        v[i] = S::one();
        self.f.constant(&v)
    }

    fn dz(&self, i: usize) -> Vec<Poly<S>> {
        self.f.constant(&self.f.dz::<S>(i))
    }

    fn dzb(&self, i: usize) -> Vec<Poly<S>> {
        self.f.constant(&self.f.dzb::<S>(i))
    }

    fn c(&self, t: &[S], slots: &[&[Poly<S>]]) -> Poly<S> {
        contract(t, self.d, slots)
    }

    fn one(&self) -> Mat<S> {
        Mat::identity(self.j.rank)
    }

    fn func(&self, p: &Poly<S>) -> MatOp<S> {
        let rank = self.j.rank;
        DiffOp::function(&p.map(|c| Mat::scalar(rank, c.clone())))
    }

    fn gen(&self, g: Gen) -> MatOp<S> {
        DiffOp::generator(self.j.n, g, self.one())
    }

    fn nabla0(&self, i: usize) -> MatOp<S> {
        nabla0(self.j.n, i, self.one())
    }

    /// R^E(u, v) with polynomial vector arguments, as a matrix-valued function.
    fn re_poly(&self, u: &[Poly<S>], v: &[Poly<S>]) -> MatOp<S> {
        let n = self.j.n;
        let mut p: Poly<Mat<S>> = Poly::zero(2 * n);
        for k in 0..self.d {
            for l in 0..self.d {
                let m = &self.j.re[k * self.d + l];
                if m.is_zero() {
                    continue;
                }
                let w = u[k].mul(&v[l]);
                for (e, c) in &w.terms {
                    p.add_term(e.clone(), m.scale(c));
                }
            }
        }
        DiffOp::function(&p)
    }

    fn mul(&self, a: &MatOp<S>, b: &MatOp<S>) -> MatOp<S> {
        a.mul(&self.m, b)
    }
}

/// 𝒪₁ = −⅔(∂_jR^L)(ℛ,e_i)Z_j ∇̃_i − ⅓(∂_iR^L)(ℛ,e_i) − ∇_ℛτ.
pub fn build_o1<S: Scalar>(j: &PointJets<S>) -> Result<MatOp<S>> {
    let cx = Ctx::new(j)?;
    let r = &cx.r;
    let mut op = DiffOp::zero(j.n);
    let mut f = Poly::zero(2 * j.n);
    for i in 0..cx.d {
        let ei = cx.e(i);
        let g = cx.c(&j.drl, &[r, r, &ei]).scale(&S::from_ratio(-2, 3));
        op = op.add(&cx.mul(&cx.func(&g), &cx.nabla0(i)));
        f = f.sub(&cx.c(&j.drl, &[&ei, r, &ei]).scale(&S::from_ratio(1, 3)));
        f = f.sub(&r[i].scale(&j.dtau[i]));
    }
    Ok(op.add(&cx.func(&f)))
}

/// 𝒪₂ term by term, with the commutator [ℒ₀, ·] expanded by normal ordering.
pub fn build_o2<S: Scalar>(j: &PointJets<S>) -> Result<MatOp<S>> {
    let cx = Ctx::new(j)?;
    let r = &cx.r;
    let d = cx.d;
    let n = j.n;
    let es: Vec<_> = (0..d).map(|i| cx.e(i)).collect();
    let mut op = DiffOp::zero(n);

    // ⅓⟨R(ℛ,e_i)ℛ,e_j⟩ ∇̃_i∇̃_j
    for i in 0..d {
        for k in 0..d {
            let g = cx.c(&j.rtx, &[r, &es[i], r, &es[k]]).scale(&S::from_ratio(1, 3));
            if g.is_zero() {
                continue;
            }
            let nn = cx.mul(&cx.nabla0(i), &cx.nabla0(k));
            op = op.add(&cx.mul(&cx.func(&g), &nn));
        }
    }

    // [⅔⟨R(ℛ,e_j)e_j,e_i⟩ − ¼ ∂²R^L(ℛ,e_i)ZZ − R^E(ℛ,e_i)] ∇̃_i
    let mut div = Poly::zero(2 * n);
    for i in 0..d {
        let mut g = Poly::zero(2 * n);
        for k in 0..d {
            g = g.add(&cx.c(&j.rtx, &[r, &es[k], &es[k], &es[i]]).scale(&S::from_ratio(2, 3)));
        }
        let cubic = cx.c(&j.d2rl, &[r, r, r, &es[i]]).scale(&S::from_ratio(1, 2));
        g = g.sub(&cubic.scale(&S::from_ratio(1, 2)));
        let coef = cx.func(&g).sub(&cx.re_poly(r, &es[i]));
        op = op.add(&cx.mul(&coef, &cx.nabla0(i)));
        div = div.add(&cx.f.d_real(&cubic, i));
    }
    // −¼ ∂_{Z_i}(½ Σ ∂²R^L Z^α/α! (ℛ,e_i)), a function
    let mut f = div.scale(&S::from_ratio(-1, 4));

    // −1/9 Σ_i v_i², v_i = (∂_jR^L)(ℛ,e_i)Z_j
    for i in 0..d {
        let v = cx.c(&j.drl, &[r, r, &es[i]]);
        f = f.sub(&v.mul(&v).scale(&S::from_ratio(1, 9)));
    }
    // −½ ∂²τ ZZ
    f = f.sub(&cx.c(&j.d2tau, &[r, r]).scale(&S::from_ratio(1, 2)));
    op = op.add(&cx.func(&f));

    // −1/12 [ℒ₀, ⟨R(ℛ,e_i)ℛ,e_i⟩]
    let mut ric = Poly::zero(2 * n);
    for i in 0..d {
        ric = ric.add(&cx.c(&j.rtx, &[r, &es[i], r, &es[i]]));
    }
    let l = l0(n, cx.one());
    let comm = l.commutator(&cx.m, &cx.func(&ric));
    op = op.sub(&comm.scale(&S::from_ratio(1, 12)));

    Ok(op.add(&DiffOp::scalar(n, j.phi.clone())))
}

/// The closed form of 𝒪₂P^N in the complex frame, assembled independently of
/// [`build_o2`].
pub fn closed_o2_pn<S: Scalar>(j: &PointJets<S>) -> Result<KernelPoly<Mat<S>>> {
    let cx = Ctx::new(j)?;
    let r = &cx.r;
    let n = j.n;
    let d = cx.d;
    let mut op = DiffOp::zero(n);
    let dz: Vec<_> = (0..n).map(|i| cx.dz(i)).collect();
    let dzb: Vec<_> = (0..n).map(|i| cx.dzb(i)).collect();

    for i in 0..n {
        let bi = cx.gen(Gen::B(i));
        // ⅓ b_i b_j ⟨R(ℛ,∂z̄_i)ℛ,∂z̄_j⟩
        for k in 0..n {
            let g = cx.c(&j.rtx, &[r, &dzb[i], r, &dzb[k]]).scale(&S::from_ratio(1, 3));
            let bb = cx.mul(&bi, &cx.gen(Gen::B(k)));
            op = op.add(&cx.mul(&bb, &cx.func(&g)));
        }
        // ½ b_i Σ ∂²R^L(ℛ,∂z̄_i) Z^α/α!
        let g = cx.c(&j.d2rl, &[r, r, r, &dzb[i]]).scale(&S::from_ratio(1, 4));
        op = op.add(&cx.mul(&bi, &cx.func(&g)));
        // 4/3 b_i [⟨R(∂z_k,∂z̄_k)ℛ,∂z̄_i⟩ − ⟨R(ℛ,∂z_k)∂z̄_k,∂z̄_i⟩]
        let mut h = Poly::zero(2 * n);
        for k in 0..n {
            h = h.add(&cx.c(&j.rtx, &[&dz[k], &dzb[k], r, &dzb[i]]));
            h = h.sub(&cx.c(&j.rtx, &[r, &dz[k], &dzb[k], &dzb[i]]));
        }
        op = op.add(&cx.mul(&bi, &cx.func(&h.scale(&S::from_ratio(4, 3)))));
        // R^E(ℛ,∂z̄_i) b_i
        op = op.add(&cx.mul(&cx.re_poly(r, &dzb[i]), &bi));
    }

    let mut f = Poly::zero(2 * n);
    let mut ric = Poly::zero(2 * n);
    for i in 0..n {
        // ⟨(∇∇𝒥)_{(ℛ,ℛ)}∂z_i, ∂z̄_i⟩
        f = f.add(&cx.c(&j.nnj, &[r, r, &dz[i], &dzb[i]]));
        for k in 0..n {
            f = f.add(&cx.c(&j.rtx, &[&dz[i], &dz[k], &dzb[i], &dzb[k]]).scale(&S::from_i64(4)));
        }
        ric = ric.add(&cx.c(&j.rtx, &[r, &dz[i], r, &dzb[i]]));
    }
    // 1/9 |(∇_ℛ𝒥)ℛ|²; the vector is imaginary, so |w|² = −Σ w_l²
    for l in 0..d {
        let w = cx.c(&j.drl, &[r, r, &cx.e(l)]);
        f = f.sub(&w.mul(&w).scale(&S::from_ratio(1, 9)));
    }
    f = f.sub(&cx.c(&j.d2tau, &[r, r]).scale(&S::from_ratio(1, 2)));
    op = op.add(&cx.func(&f));
    let l = l0(n, cx.one());
    op = op.sub(&cx.mul(&l, &cx.func(&ric)).scale(&S::from_ratio(1, 3)));
    op = op.add(&DiffOp::scalar(n, j.phi.clone()));

    Ok(op.apply(&cx.m, &KernelPoly::pn(n, cx.one())))
}

/// Kähler form of 𝒪₁: ⅔ b_i⟨(∇_z̄𝒥)z̄,∂z̄_i⟩ − ⅔⟨(∇_z𝒥)z,∂z_i⟩b⁺_i.
pub fn kahler_o1<S: Scalar>(j: &PointJets<S>) -> Result<MatOp<S>> {
    if !j.kahler {
        return Err(Error::NotKahler);
    }
    let cx = Ctx::new(j)?;
    let z = cx.f.z_field::<S>();
    let zb = cx.f.zb_field::<S>();
    let mut op = DiffOp::zero(j.n);
    for i in 0..j.n {
        let g = cx.c(&j.drl, &[&zb, &zb, &cx.dzb(i)]).scale(&S::from_ratio(2, 3));
        op = op.add(&cx.mul(&cx.gen(Gen::B(i)), &cx.func(&g)));
        let h = cx.c(&j.drl, &[&z, &z, &cx.dz(i)]).scale(&S::from_ratio(2, 3));
        op = op.sub(&cx.mul(&cx.func(&h), &cx.gen(Gen::Bp(i))));
    }
    Ok(op)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::jets::random_jets;
    use crate::scalar::{int, PiRat, Rat};
    use crate::wick::project_n;

    #[test]
    fn flat_operators() {
        let j = PointJets::flat(vec![int::<Rat>(2)], 1, false, int(5)).unwrap();
        assert!(build_o1(&j).unwrap().is_zero());
        assert_eq!(build_o2(&j).unwrap(), DiffOp::scalar(1, Mat::scalar(1, int(5))));
    }

    #[test]
    fn o1_vanishes_between_projections() {
        for seed in 0..3 {
            let j: PointJets<Rat> = random_jets(2, 1, seed, false).unwrap();
            let m = j.model().unwrap();
            let k = build_o1(&j).unwrap().apply(&m, &KernelPoly::pn(2, Mat::identity(1)));
            assert!(project_n(&m, &k).is_zero(), "seed={seed}");
        }
    }

    #[test]
    fn o2_matches_closed_form() {
        for seed in 0..3 {
            let j: PointJets<Rat> = random_jets(2, 2, seed, false).unwrap();
            let m = j.model().unwrap();
            let lhs = build_o2(&j).unwrap().apply(&m, &KernelPoly::pn(2, Mat::identity(2)));
            assert_eq!(lhs, closed_o2_pn(&j).unwrap(), "seed={seed}");
        }
    }

    #[test]
    fn kahler_o1_two_term_form() {
        for seed in 0..3 {
            let j: PointJets<PiRat> = random_jets(2, 1, seed, true).unwrap();
            assert_eq!(build_o1(&j).unwrap(), kahler_o1(&j).unwrap(), "seed={seed}");
        }
    }

    #[test]
    fn operators_are_symmetric() {
        let j: PointJets<Rat> = random_jets(2, 2, 11, false).unwrap();
        let m = j.model().unwrap();
        let o1 = build_o1(&j).unwrap();
        let o2 = build_o2(&j).unwrap();
        assert_eq!(o1.adjoint(&m), o1);
        assert_eq!(o2.adjoint(&m), o2);
    }
}
