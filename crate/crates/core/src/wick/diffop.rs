//! Normal-ordered elements of the algebra generated by z, z̄, b, b⁺.

use super::kernel::{apply_b, apply_bplus, KernelPoly};
use super::model::ModelSpec;
use crate::error::Result;
use crate::poly::{degree, zero_exps, Exps, Poly};
use crate::scalar::{Coeff, Scalar};
use std::collections::BTreeMap;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Gen {
    Z(usize),
    Zb(usize),
    B(usize),
    Bp(usize),
}

impl Gen {
    fn index(&self) -> usize {
        match *self {
            Gen::Z(i) | Gen::Zb(i) | Gen::B(i) | Gen::Bp(i) => i,
        }
    }
}

/// Σ c · z^α z̄^β b^γ (b⁺)^δ with multiplication operators left, then b, then b⁺.
/// Variable blocks: `[α | β | γ | δ]`.
#[derive(Clone, Debug, PartialEq)]
pub struct DiffOp<C: Coeff> {
    pub n: usize,
    pub poly: Poly<C>,
}

impl<C: Coeff> DiffOp<C> {
    pub fn zero(n: usize) -> Self {
        DiffOp { n, poly: Poly::zero(4 * n) }
    }

    pub fn scalar(n: usize, c: C) -> Self {
        DiffOp { n, poly: Poly::constant(4 * n, c) }
    }

    /// Multiplication by a polynomial f(z, z̄) given over `[z | z̄]`.
    pub fn function(f: &Poly<C>) -> Self {
        let n = f.nvars / 2;
        let mut p = Poly::zero(4 * n);
        let pad = zero_exps(2 * n);
        for (e, c) in &f.terms {
            let mut k = e.clone();
            k.extend_from_slice(&pad);
            p.add_term(k, c.clone());
        }
        DiffOp { n, poly: p }
    }

    pub fn term(n: usize, alpha: &[u8], beta: &[u8], gamma: &[u8], delta: &[u8], c: C) -> Self {
        DiffOp { n, poly: Poly::monomial(super::kernel::join_blocks([alpha, beta, gamma, delta]), c) }
    }

    pub fn generator(n: usize, g: Gen, one: C) -> Self {
        let mut e = zero_exps(4 * n);
        let i = g.index();
        match g {
            Gen::Z(_) => e[i] += 1,
            Gen::Zb(_) => e[n + i] += 1,
            Gen::B(_) => e[2 * n + i] += 1,
            Gen::Bp(_) => e[3 * n + i] += 1,
        }
        DiffOp { n, poly: Poly::monomial(e, one) }
    }

    pub fn is_zero(&self) -> bool {
        self.poly.is_zero()
    }

    pub fn add(&self, o: &Self) -> Self {
        DiffOp { n: self.n, poly: self.poly.add(&o.poly) }
    }

    pub fn sub(&self, o: &Self) -> Self {
        DiffOp { n: self.n, poly: self.poly.sub(&o.poly) }
    }

    pub fn scale(&self, s: &C::S) -> Self {
        DiffOp { n: self.n, poly: self.poly.scale(s) }
    }

    pub fn map<D: Coeff>(&self, f: impl Fn(&C) -> D) -> DiffOp<D> {
        DiffOp { n: self.n, poly: self.poly.map(f) }
    }

    /// Parities of (Z-degree + number of ladder factors) over all terms. Each
    /// b, b⁺ carries one unit of the rescaling weight, as ∇ does.
    pub fn weight_parities(&self) -> Vec<usize> {
        let mut v: Vec<usize> = self.poly.terms.keys().map(|e| degree(e) % 2).collect();
        v.sort();
        v.dedup();
        v
    }

    /// Largest total degree of a term.
    pub fn max_degree(&self) -> usize {
        self.poly.max_degree()
    }

    /// g · self, re-normal-ordered.
    pub fn left_mul_gen(&self, m: &ModelSpec<C::S>, g: Gen) -> Self {
        let n = self.n;
        let mut out = Poly::zero(4 * n);
        for (e, c) in &self.poly.terms {
            match g {
                Gen::Z(i) => {
                    let mut k = e.clone();
                    k[i] += 1;
                    out.add_term(k, c.clone());
                }
                Gen::Zb(i) => {
                    let mut k = e.clone();
                    k[n + i] += 1;
                    out.add_term(k, c.clone());
                }
                Gen::B(i) => {
                    // b_i m = m b_i − 2 ∂_{z_i} m
                    let mut k = e.clone();
                    k[2 * n + i] += 1;
                    out.add_term(k, c.clone());
                    let ai = e[i];
                    if ai > 0 {
                        let mut k = e.clone();
                        k[i] -= 1;
                        out.add_term(k, c.scale(&C::S::from_i64(-2 * ai as i64)));
                    }
                }
                Gen::Bp(i) => {
                    // b⁺_i m b^γ = m b^γ b⁺_i + 2a_iγ_i m b^{γ−e_i} + 2 (∂_{z̄_i} m) b^γ
                    let mut k = e.clone();
                    k[3 * n + i] += 1;
                    out.add_term(k, c.clone());
                    let gi = e[2 * n + i];
                    if gi > 0 {
                        let mut k = e.clone();
                        k[2 * n + i] -= 1;
                        let f = m.a()[i].scale(&C::S::from_i64(2 * gi as i64));
                        out.add_term(k, c.scale(&f));
                    }
                    let bi = e[n + i];
                    if bi > 0 {
                        let mut k = e.clone();
                        k[n + i] -= 1;
                        out.add_term(k, c.scale(&C::S::from_i64(2 * bi as i64)));
                    }
                }
            }
        }
        out.prune();
        DiffOp { n, poly: out }
    }

    /// Operator product self · o in normal order; coefficients multiply left to right.
    pub fn mul(&self, m: &ModelSpec<C::S>, o: &Self) -> Self {
        let n = self.n;
        let mut out = Poly::zero(4 * n);
        // group left terms by their ladder part so each ladder word is applied once
        let mut groups: BTreeMap<Exps, Vec<(Exps, C)>> = BTreeMap::new();
        for (e, c) in &self.poly.terms {
            groups
                .entry(Exps::from_slice(&e[2 * n..]))
                .or_default()
                .push((Exps::from_slice(&e[..2 * n]), c.clone()));
        }
        for (ladder, funcs) in groups {
            let mut x = o.clone();
            for i in 0..n {
                for _ in 0..ladder[n + i] {
                    x = x.left_mul_gen(m, Gen::Bp(i));
                }
            }
            for i in 0..n {
                for _ in 0..ladder[i] {
                    x = x.left_mul_gen(m, Gen::B(i));
                }
            }
            for (f, c) in funcs {
                let mut shift = f.clone();
                shift.extend_from_slice(&zero_exps(2 * n));
                for (e, cx) in &x.poly.terms {
                    out.add_term(crate::poly::exps_add(e, &shift), c.mul(cx));
                }
            }
        }
        out.prune();
        DiffOp { n, poly: out }
    }

    pub fn commutator(&self, m: &ModelSpec<C::S>, o: &Self) -> Self {
        self.mul(m, o).sub(&o.mul(m, self))
    }

    /// Formal adjoint: b† = b⁺, z† = z̄, coefficients conjugate-transposed.
    pub fn adjoint(&self, m: &ModelSpec<C::S>) -> Self {
        let n = self.n;
        let mut out = DiffOp::zero(n);
        for (e, c) in &self.poly.terms {
            let b = super::kernel::Blocks { e, n };
            let zero = zero_exps(n);
            let mut x = DiffOp::term(n, b.b(1), b.b(0), &zero, &zero, c.adjoint());
            for i in 0..n {
                for _ in 0..b.b(2)[i] {
                    x = x.left_mul_gen(m, Gen::Bp(i));
                }
            }
            for i in 0..n {
                for _ in 0..b.b(3)[i] {
                    x = x.left_mul_gen(m, Gen::B(i));
                }
            }
            out = out.add(&x);
        }
        out
    }

    /// Kernel of op∘K.
    pub fn apply(&self, m: &ModelSpec<C::S>, k: &KernelPoly<C>) -> KernelPoly<C> {
        let n = self.n;
        let mut groups: BTreeMap<Exps, Vec<(Exps, C)>> = BTreeMap::new();
        for (e, c) in &self.poly.terms {
            groups
                .entry(Exps::from_slice(&e[2 * n..]))
                .or_default()
                .push((Exps::from_slice(&e[..2 * n]), c.clone()));
        }
        let mut out = Poly::zero(4 * n);
        for (ladder, funcs) in groups {
            let mut q = k.poly.clone();
            for i in 0..n {
                for _ in 0..ladder[n + i] {
                    q = apply_bplus(n, i, &q);
                }
            }
            for i in 0..n {
                for _ in 0..ladder[i] {
                    q = apply_b(m, i, &q);
                }
            }
            if q.is_zero() {
                continue;
            }
            for (f, c) in funcs {
                let mut shift = f.clone();
                shift.extend_from_slice(&zero_exps(2 * n));
                for (e, cq) in &q.terms {
                    out.add_term(crate::poly::exps_add(e, &shift), c.mul(cq));
                }
            }
        }
        out.prune();
        KernelPoly { n, poly: out }
    }

    pub fn approx_eq(&self, o: &Self) -> bool {
        self.poly.approx_eq(&o.poly)
    }
}

/// The model operator ℒ₀ = Σ bᵢ bᵢ⁺.
pub fn l0<C: Coeff>(n: usize, one: C) -> DiffOp<C> {
    let zero = zero_exps(n);
    let mut op = DiffOp::zero(n);
    for i in 0..n {
        let u = crate::poly::unit_exps(n, i);
        op = op.add(&DiffOp::term(n, &zero, &zero, &u, &u, one.clone()));
    }
    op
}

/// Normal-orders `prefactor · g₁ g₂ ⋯ g_k`.
pub fn normal_order<C: Coeff>(
    m: &ModelSpec<C::S>,
    prefactor: C,
    word: &[Gen],
) -> Result<DiffOp<C>> {
    for g in word {
        m.check_index(g.index())?;
    }
    let n = m.n();
    let one = prefactor.scalar_like(C::S::one());
    let mut x = DiffOp::scalar(n, one);
    for g in word.iter().rev() {
        x = x.left_mul_gen(m, *g);
    }
    Ok(DiffOp { n, poly: x.poly.lmul(&prefactor) })
}
