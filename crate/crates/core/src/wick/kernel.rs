//! Kernels of the form Q·P^N and their normal forms Σ_β b^β(Q_β P^N).

use super::model::{ModelSpec, NormalForm};
use crate::error::Result;
use crate::poly::{degree, zero_exps, Exps, Poly};
use crate::scalar::{Coeff, Scalar};
use num_complex::Complex64;
use std::fmt::Write as _;
use std::sync::Arc;

/// Q(z, z̄, z', z̄')·P^N(Z, Z'). Variable blocks: `[z | z̄ | z' | z̄']`.
#[derive(Clone, Debug, PartialEq)]
pub struct KernelPoly<C: Coeff> {
    pub n: usize,
    pub poly: Poly<C>,
}

/// Σ_β b^β(Q_β(z, z', z̄')·P^N). Variable blocks: `[β | z | z' | z̄']`.
#[derive(Clone, Debug, PartialEq)]
pub struct NormalKernel<C: Coeff> {
    pub n: usize,
    pub poly: Poly<C>,
}

/// Exponent blocks of a kernel monomial.
#[derive(Clone, Copy, Debug)]
pub struct Blocks<'a> {
    pub e: &'a [u8],
    pub n: usize,
}

impl<'a> Blocks<'a> {
    pub fn b(&self, k: usize) -> &'a [u8] {
        &self.e[k * self.n..(k + 1) * self.n]
    }
}

pub fn join_blocks(parts: [&[u8]; 4]) -> Exps {
    let mut e = Exps::new();
    for p in parts {
        e.extend_from_slice(p);
    }
    e
}

impl<C: Coeff> KernelPoly<C> {
    pub fn zero(n: usize) -> Self {
        KernelPoly { n, poly: Poly::zero(4 * n) }
    }

    /// c·P^N.
    pub fn pn(n: usize, c: C) -> Self {
        KernelPoly { n, poly: Poly::constant(4 * n, c) }
    }

    pub fn monomial(n: usize, z: &[u8], zb: &[u8], zp: &[u8], zbp: &[u8], c: C) -> Self {
        KernelPoly { n, poly: Poly::monomial(join_blocks([z, zb, zp, zbp]), c) }
    }

    pub fn is_zero(&self) -> bool {
        self.poly.is_zero()
    }

    pub fn add(&self, o: &Self) -> Self {
        KernelPoly { n: self.n, poly: self.poly.add(&o.poly) }
    }

    pub fn sub(&self, o: &Self) -> Self {
        KernelPoly { n: self.n, poly: self.poly.sub(&o.poly) }
    }

    pub fn neg(&self) -> Self {
        KernelPoly { n: self.n, poly: self.poly.neg() }
    }

    pub fn scale(&self, s: &C::S) -> Self {
        KernelPoly { n: self.n, poly: self.poly.scale(s) }
    }

    pub fn lmul(&self, c: &C) -> Self {
        KernelPoly { n: self.n, poly: self.poly.lmul(c) }
    }

    pub fn map<D: Coeff>(&self, f: impl Fn(&C) -> D) -> KernelPoly<D> {
        KernelPoly { n: self.n, poly: self.poly.map(f) }
    }

    pub fn approx_eq(&self, o: &Self) -> bool {
        self.n == o.n && self.poly.approx_eq(&o.poly)
    }

    /// K*(Z,Z') = K(Z',Z)^*.
    pub fn adjoint(&self) -> Self {
        let n = self.n;
        let mut p = Poly::zero(4 * n);
        for (e, c) in &self.poly.terms {
            let b = Blocks { e, n };
            p.add_term(join_blocks([b.b(3), b.b(2), b.b(1), b.b(0)]), c.adjoint());
        }
        KernelPoly { n, poly: p }
    }

    /// Kernel value at Z = Z' = 0 divided by P^N(0,0).
    pub fn eval_at_origin(&self) -> Option<C> {
        self.poly.constant_term().cloned()
    }

    pub fn max_degree(&self) -> usize {
        self.poly.max_degree()
    }

    /// Degrees of every monomial, as `(total, z, z̄, z', z̄')`.
    pub fn degrees(&self) -> impl Iterator<Item = [usize; 5]> + '_ {
        self.poly.terms.keys().map(move |e| {
            let b = Blocks { e, n: self.n };
            [degree(e), degree(b.b(0)), degree(b.b(1)), degree(b.b(2)), degree(b.b(3))]
        })
    }

    /// One term per line: `coeff * z^α zbar^β z'^γ zbar'^δ`.
    pub fn dump(&self) -> String {
        let mut s = String::new();
        for (e, c) in &self.poly.terms {
            let b = Blocks { e, n: self.n };
            let f = |x: &[u8]| x.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(" ");
            let _ = writeln!(
                s,
                "{:?} * z^{} zbar^{} z'^{} zbar'^{}",
                c,
                f(b.b(0)),
                f(b.b(1)),
                f(b.b(2)),
                f(b.b(3))
            );
        }
        s
    }

    pub fn prune(&mut self) {
        self.poly.prune();
    }
}

impl<S: Scalar> KernelPoly<S> {
    /// Float evaluation of Q(Z,Z')·P^N(Z,Z'). `zs`, `zps` are real 2n-vectors.
    pub fn eval(&self, a: &[f64], zs: &[f64], zps: &[f64]) -> Complex64 {
        let z = to_complex(zs);
        let zp = to_complex(zps);
        let mut q = Complex64::new(0.0, 0.0);
        for (e, c) in &self.poly.terms {
            let b = Blocks { e, n: self.n };
            let mut m = c.to_c64();
            for i in 0..self.n {
                m *= z[i].powi(b.b(0)[i] as i32)
                    * z[i].conj().powi(b.b(1)[i] as i32)
                    * zp[i].powi(b.b(2)[i] as i32)
                    * zp[i].conj().powi(b.b(3)[i] as i32);
            }
            q += m;
        }
        q * pn_value(a, zs, zps)
    }
}

/// z_j = Z_{2j-1} + i Z_{2j}.
pub fn to_complex(zs: &[f64]) -> Vec<Complex64> {
    zs.chunks(2).map(|c| Complex64::new(c[0], c[1])).collect()
}

/// The model Bergman kernel P^N(Z,Z') at real points.
pub fn pn_value(a: &[f64], zs: &[f64], zps: &[f64]) -> Complex64 {
    let z = to_complex(zs);
    let zp = to_complex(zps);
    let mut pref = 1.0;
    let mut expo = Complex64::new(0.0, 0.0);
    for i in 0..a.len() {
        pref *= a[i] / (2.0 * std::f64::consts::PI);
        expo += -0.25 * a[i] * (z[i].norm_sqr() + zp[i].norm_sqr() - 2.0 * z[i] * zp[i].conj());
    }
    pref * expo.exp()
}

impl<C: Coeff> NormalKernel<C> {
    pub fn zero(n: usize) -> Self {
        NormalKernel { n, poly: Poly::zero(4 * n) }
    }

    pub fn is_zero(&self) -> bool {
        self.poly.is_zero()
    }

    pub fn add(&self, o: &Self) -> Self {
        NormalKernel { n: self.n, poly: self.poly.add(&o.poly) }
    }

    /// Keeps the β = 0 part (left multiplication by P^N).
    pub fn project_n(&self) -> Self {
        let n = self.n;
        let mut p = Poly::zero(4 * n);
        for (e, c) in &self.poly.terms {
            if e[..n].iter().all(|&x| x == 0) {
                p.terms.insert(e.clone(), c.clone());
            }
        }
        NormalKernel { n, poly: p }
    }

    /// Drops the β = 0 part and divides each β-term by 2β·a.
    pub fn inv_l0_perp(&self, m: &ModelSpec<C::S>) -> Result<Self> {
        self.map_beta(|beta| {
            if beta.iter().all(|&x| x == 0) {
                Ok(None)
            } else {
                Ok(Some(m.eigenvalue(beta).inv()?))
            }
        })
    }

    /// Multiplies each β-term by a scalar chosen from β (None drops the term).
    pub fn map_beta(
        &self,
        f: impl Fn(&[u8]) -> Result<Option<C::S>>,
    ) -> Result<Self> {
        let n = self.n;
        let mut p = Poly::zero(4 * n);
        for (e, c) in &self.poly.terms {
            if let Some(s) = f(&e[..n])? {
                p.add_term(e.clone(), c.scale(&s));
            }
        }
        Ok(NormalKernel { n, poly: p })
    }

    /// The β = 0 part as an ordinary kernel (no z̄ dependence).
    pub fn kernel_part(&self) -> KernelPoly<C> {
        let n = self.n;
        let zero = zero_exps(n);
        let mut p = Poly::zero(4 * n);
        for (e, c) in &self.poly.terms {
            if e[..n].iter().all(|&x| x == 0) {
                let b = Blocks { e, n };
                p.add_term(join_blocks([b.b(1), &zero, b.b(2), b.b(3)]), c.clone());
            }
        }
        KernelPoly { n, poly: p }
    }
}

/// b_i acting on Q·P^N: (−2∂_{z_i}Q + a_i(z̄_i − z̄'_i)Q)·P^N.
pub fn apply_b<C: Coeff>(m: &ModelSpec<C::S>, i: usize, q: &Poly<C>) -> Poly<C> {
    let n = m.n();
    let mut r = q.deriv(i).scale(&C::S::from_i64(-2));
    let ai = &m.a()[i];
    for (e, c) in &q.terms {
        let ca = c.scale(ai);
        let mut e1 = e.clone();
        e1[n + i] += 1;
        r.add_term(e1, ca.clone());
        let mut e2 = e.clone();
        e2[3 * n + i] += 1;
        r.add_term(e2, ca.neg());
    }
    r
}

/// b⁺_i acting on Q·P^N: 2∂_{z̄_i}Q·P^N.
pub fn apply_bplus<C: Coeff>(n: usize, i: usize, q: &Poly<C>) -> Poly<C> {
    q.deriv(n + i).scale(&C::S::from_i64(2))
}

/// Normal form of z^α z̄^β P^N, keyed `[ν | μ | κ]` for b^ν(z^μ z̄'^κ P^N).
pub(crate) fn normal_form<S: Scalar>(m: &ModelSpec<S>, alpha: &[u8], beta: &[u8]) -> NormalForm<S> {
    let key = (Exps::from_slice(alpha), Exps::from_slice(beta));
    if let Some(v) = m.nf_cache.lock().unwrap().get(&key) {
        return v.clone();
    }
    let n = m.n();
    let result: Vec<(Exps, S)> = if let Some(i) = beta.iter().position(|&x| x > 0) {
        let mut b2 = Exps::from_slice(beta);
        b2[i] -= 1;
        let prev = normal_form(m, alpha, &b2);
        let mut acc = Poly::<S>::zero(3 * n);
        let ainv = &m.a_inv()[i];
        for (e, s) in prev.iter() {
            // z̄_i b^ν(QP) = (1/a_i) b^{ν+e_i}(QP) + b^ν((2/a_i)∂_{z_i}Q + z̄'_i Q)P
            let mut e1 = e.clone();
            e1[i] += 1;
            acc.add_term(e1, s.mul(ainv));
            let mu = e[n + i];
            if mu > 0 {
                let mut e2 = e.clone();
                e2[n + i] -= 1;
                acc.add_term(e2, s.mul(ainv).scale(&S::from_i64(2 * mu as i64)));
            }
            let mut e3 = e.clone();
            e3[2 * n + i] += 1;
            acc.add_term(e3, s.clone());
        }
        acc.prune();
        acc.terms.into_iter().collect()
    } else if let Some(i) = alpha.iter().position(|&x| x > 0) {
        let mut a2 = Exps::from_slice(alpha);
        a2[i] -= 1;
        let prev = normal_form(m, &a2, beta);
        let mut acc = Poly::<S>::zero(3 * n);
        for (e, s) in prev.iter() {
            // z_i b^ν(QP) = b^ν(z_i Q P) + 2ν_i b^{ν−e_i}(QP)
            let mut e1 = e.clone();
            e1[n + i] += 1;
            acc.add_term(e1, s.clone());
            let nu = e[i];
            if nu > 0 {
                let mut e2 = e.clone();
                e2[i] -= 1;
                acc.add_term(e2, s.scale(&S::from_i64(2 * nu as i64)));
            }
        }
        acc.prune();
        acc.terms.into_iter().collect()
    } else {
        vec![(zero_exps(3 * n), S::one())]
    };
    let result = Arc::new(result);
    m.nf_cache.lock().unwrap().insert(key, result.clone());
    result
}

/// P^N(w^α w̄^β)P^N as `[μ | κ]` for z^μ z̄'^κ P^N.
pub(crate) fn middle_form<S: Scalar>(m: &ModelSpec<S>, alpha: &[u8], beta: &[u8]) -> NormalForm<S> {
    let key = join_blocks([alpha, beta, &[], &[]]);
    if let Some(v) = m.mid_cache.lock().unwrap().get(&key) {
        return v.clone();
    }
    let n = m.n();
    let nf = normal_form(m, alpha, beta);
    let out: Vec<(Exps, S)> = nf
        .iter()
        .filter(|(e, _)| e[..n].iter().all(|&x| x == 0))
        .map(|(e, s)| (Exps::from_slice(&e[n..]), s.clone()))
        .collect();
    let out = Arc::new(out);
    m.mid_cache.lock().unwrap().insert(key, out.clone());
    out
}

/// Rewrites a kernel in normal form; exact in exact modes.
pub fn to_normal<C: Coeff>(m: &ModelSpec<C::S>, k: &KernelPoly<C>) -> NormalKernel<C> {
    let n = k.n;
    let mut out = Poly::zero(4 * n);
    for (e, c) in &k.poly.terms {
        let b = Blocks { e, n };
        let nf = normal_form(m, b.b(0), b.b(1));
        for (ke, s) in nf.iter() {
            let kb = Blocks { e: ke, n };
            let zbp = crate::poly::exps_add(kb.b(2), b.b(3));
            out.add_term(join_blocks([kb.b(0), kb.b(1), b.b(2), &zbp]), c.scale(s));
        }
    }
    out.prune();
    NormalKernel { n, poly: out }
}

/// Inverse of [`to_normal`]: applies the b-powers.
pub fn from_normal<C: Coeff>(m: &ModelSpec<C::S>, nk: &NormalKernel<C>) -> KernelPoly<C> {
    let n = nk.n;
    let zero = zero_exps(n);
    let mut out = Poly::zero(4 * n);
    for (e, c) in &nk.poly.terms {
        let b = Blocks { e, n };
        let mut q = Poly::monomial(join_blocks([b.b(1), &zero, b.b(2), b.b(3)]), c.clone());
        for i in 0..n {
            for _ in 0..b.b(0)[i] {
                q = apply_b(m, i, &q);
            }
        }
        out.add_assign(&q);
    }
    out.prune();
    KernelPoly { n, poly: out }
}

/// P^N·K as a kernel.
pub fn project_n<C: Coeff>(m: &ModelSpec<C::S>, k: &KernelPoly<C>) -> KernelPoly<C> {
    to_normal(m, k).project_n().kernel_part()
}

/// ℒ₀⁻¹P^{N⊥}·K as a kernel.
pub fn inv_l0_perp<C: Coeff>(m: &ModelSpec<C::S>, k: &KernelPoly<C>) -> Result<KernelPoly<C>> {
    Ok(from_normal(m, &to_normal(m, k).inv_l0_perp(m)?))
}

/// Composition ∫K₁(Z,W)K₂(W,Z')dW of two kernels of the form Q·P^N.
pub fn compose<C: Coeff>(m: &ModelSpec<C::S>, k1: &KernelPoly<C>, k2: &KernelPoly<C>) -> KernelPoly<C> {
    let n = k1.n;
    let mut out = Poly::zero(4 * n);
    for (e1, c1) in &k1.poly.terms {
        let b1 = Blocks { e: e1, n };
        for (e2, c2) in &k2.poly.terms {
            let b2 = Blocks { e: e2, n };
            let wa = crate::poly::exps_add(b1.b(2), b2.b(0));
            let wb = crate::poly::exps_add(b1.b(3), b2.b(1));
            let mid = middle_form(m, &wa, &wb);
            if mid.is_empty() {
                continue;
            }
            let c12 = c1.mul(c2);
            for (me, s) in mid.iter() {
                let z = crate::poly::exps_add(b1.b(0), &me[..n]);
                let zbp = crate::poly::exps_add(b2.b(3), &me[n..]);
                out.add_term(join_blocks([&z, b1.b(1), b2.b(2), &zbp]), c12.scale(s));
            }
        }
    }
    out.prune();
    KernelPoly { n, poly: out }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{frac, int, PiRat, Rat};

    fn model1() -> ModelSpec<Rat> {
        ModelSpec::new(vec![int(3)]).unwrap()
    }

    #[test]
    fn zbar_pn_normal_form() {
        let m = model1();
        let k = KernelPoly::monomial(1, &[0], &[1], &[0], &[0], int::<Rat>(1));
        let nk = to_normal(&m, &k);
        let mut expect = Poly::zero(4);
        expect.add_term(join_blocks([&[1], &[0], &[0], &[0]]), frac::<Rat>(1, 3));
        expect.add_term(join_blocks([&[0], &[0], &[0], &[1]]), int(1));
        assert_eq!(nk.poly, expect);
    }

    #[test]
    fn round_trip() {
        let m = ModelSpec::new(vec![int::<Rat>(2), frac(1, 2)]).unwrap();
        let k = KernelPoly::monomial(2, &[1, 2], &[2, 1], &[0, 1], &[1, 0], int::<Rat>(5))
            .add(&KernelPoly::monomial(2, &[0, 0], &[3, 0], &[0, 0], &[0, 2], frac(-1, 7)));
        assert_eq!(from_normal(&m, &to_normal(&m, &k)), k);
    }

    #[test]
    fn project_zbar_zprime() {
        let m = model1();
        let k = KernelPoly::monomial(1, &[0], &[1], &[1], &[0], int::<Rat>(1));
        let p = project_n(&m, &k);
        assert_eq!(p, KernelPoly::monomial(1, &[0], &[0], &[1], &[1], int(1)));
    }

    #[test]
    fn origin_values() {
        let m = ModelSpec::new(vec![int::<Rat>(2), int(5)]).unwrap();
        let b1z1 = from_normal(
            &m,
            &NormalKernel { n: 2, poly: Poly::monomial(join_blocks([&[1, 0], &[1, 0], &[0, 0], &[0, 0]]), int::<Rat>(1)) },
        );
        assert_eq!(b1z1.eval_at_origin(), Some(int(-2)));
        let b1b2 = from_normal(
            &m,
            &NormalKernel { n: 2, poly: Poly::monomial(join_blocks([&[1, 1], &[1, 1], &[0, 0], &[0, 0]]), int::<Rat>(1)) },
        );
        assert_eq!(b1b2.eval_at_origin(), Some(int(4)));
    }

    #[test]
    fn adjoint_swaps_variables() {
        let k = KernelPoly::monomial(1, &[1], &[0], &[0], &[0], PiRat::imag_unit());
        let adj = k.adjoint();
        assert_eq!(adj, KernelPoly::monomial(1, &[0], &[0], &[0], &[1], PiRat::imag_unit().neg()));
        assert_eq!(adj.adjoint(), k);
    }

    #[test]
    fn pn_value_examples() {
        let a = [2.0 * std::f64::consts::PI];
        assert!((pn_value(&a, &[0.0, 0.0], &[0.0, 0.0]).re - 1.0).abs() < 1e-15);
        let v = pn_value(&a, &[1.0, 0.0], &[0.0, 0.0]);
        assert!((v.re - (-std::f64::consts::FRAC_PI_2).exp()).abs() < 1e-15);
        assert_eq!(v.im, 0.0);
    }
}
