//! Rational functions of the spectral parameter λ with poles at model
//! eigenvalues, residues at λ = 0, and truncated Taylor series in λ.

use super::kernel::NormalKernel;
use super::model::ModelSpec;
use crate::error::{Error, Result};
use crate::poly::Poly;
use crate::scalar::{Coeff, Scalar};

/// num(λ) / Π (λ − μ_j)^{m_j}; a root μ = 0 encodes the pole at the origin.
#[derive(Clone, Debug, PartialEq)]
pub struct RationalLambda<C: Coeff> {
    /// Numerator coefficients, lowest power first, no trailing zeros.
    num: Vec<C>,
    /// Distinct roots with positive multiplicities, ordered by real value.
    poles: Vec<(C::S, u32)>,
    /// Zero of the coefficient type (carries the matrix rank).
    zero: C,
}

fn trim<C: Coeff>(v: &mut Vec<C>) {
    while v.last().is_some_and(|c| c.is_zero()) {
        v.pop();
    }
}

/// Multiplies a polynomial in λ by (λ − μ).
fn mul_linear<C: Coeff>(p: &[C], mu: &C::S, zero: &C) -> Vec<C> {
    let mut out = vec![zero.clone(); p.len() + 1];
    for (k, c) in p.iter().enumerate() {
        out[k + 1].add_assign(c);
        out[k].add_assign(&c.scale(mu).neg());
    }
    trim(&mut out);
    out
}

/// Exact division by (λ − μ) when μ is a root; `None` otherwise.
fn div_linear<C: Coeff>(p: &[C], mu: &C::S, zero: &C) -> Option<Vec<C>> {
    if p.is_empty() {
        return Some(Vec::new());
    }
    // synthetic division from the top coefficient
    let d = p.len() - 1;
    let mut q = vec![zero.clone(); d];
    let mut carry = zero.clone();
    for k in (1..=d).rev() {
        let c = p[k].add(&carry);
        q[k - 1] = c.clone();
        carry = c.scale(mu);
    }
    let rem = p[0].add(&carry);
    if rem.is_zero() {
        trim(&mut q);
        Some(q)
    } else {
        None
    }
}

fn same_root<S: Scalar>(a: &S, b: &S) -> bool {
    if S::EXACT {
        a == b
    } else {
        a.approx_eq(b, 1.0)
    }
}

impl<C: Coeff> RationalLambda<C> {
    pub fn constant(c: C) -> Self {
        let zero = c.zero_like();
        let mut num = vec![c];
        trim(&mut num);
        RationalLambda { num, poles: Vec::new(), zero }
    }

    pub fn numerator(&self) -> &[C] {
        &self.num
    }

    pub fn poles(&self) -> &[(C::S, u32)] {
        &self.poles
    }

    /// Multiplicity of the pole at λ = 0 (after reduction in exact modes).
    pub fn pole_order_at_zero(&self) -> u32 {
        self.poles.iter().find(|(r, _)| r.is_zero()).map_or(0, |(_, m)| *m)
    }

    /// self / (λ − μ).
    pub fn div_by_linear(&self, mu: &C::S) -> Self {
        let mut poles = self.poles.clone();
        match poles.iter_mut().find(|(r, _)| same_root(r, mu)) {
            Some(p) => p.1 += 1,
            None => poles.push((mu.clone(), 1)),
        }
        self.rebuild(self.num.clone(), poles)
    }

    fn rebuild(&self, num: Vec<C>, mut poles: Vec<(C::S, u32)>) -> Self {
        if num.is_empty() {
            return RationalLambda { num, poles: Vec::new(), zero: self.zero.clone() };
        }
        poles.retain(|(_, m)| *m > 0);
        poles.sort_by(|a, b| a.0.to_c64().re.total_cmp(&b.0.to_c64().re));
        let mut r = RationalLambda { num, poles, zero: self.zero.clone() };
        r.reduce();
        r
    }

    /// Cancels common linear factors (exact modes only).
    fn reduce(&mut self) {
        if !C::S::EXACT {
            return;
        }
        for i in 0..self.poles.len() {
            while self.poles[i].1 > 0 {
                match div_linear(&self.num, &self.poles[i].0, &self.zero) {
                    Some(q) => {
                        self.num = q;
                        self.poles[i].1 -= 1;
                    }
                    None => break,
                }
            }
        }
        self.poles.retain(|(_, m)| *m > 0);
    }

    /// Numerators of self and o over the common denominator, and that denominator.
    #[allow(clippy::type_complexity)]
    fn common(&self, o: &Self) -> (Vec<C>, Vec<C>, Vec<(C::S, u32)>) {
        let mut poles = self.poles.clone();
        for (r, m) in &o.poles {
            match poles.iter_mut().find(|(x, _)| same_root(x, r)) {
                Some(p) => p.1 = p.1.max(*m),
                None => poles.push((r.clone(), *m)),
            }
        }
        let lift = |x: &Self| {
            let mut num = x.num.clone();
            for (r, m) in &poles {
                let own = x.poles.iter().find(|(y, _)| same_root(y, r)).map_or(0, |p| p.1);
                for _ in own..*m {
                    num = mul_linear(&num, r, &x.zero);
                }
            }
            num
        };
        (lift(self), lift(o), poles)
    }

    /// Taylor coefficient of order k at λ = 0 of num(λ)/Π_{μ≠0}(λ−μ)^m,
    /// i.e. with the pole at the origin removed.
    fn regular_taylor(&self, k: usize) -> Result<C> {
        let one = C::S::one();
        let mut series = vec![C::S::zero(); k + 1];
        series[0] = one.clone();
        for (mu, m) in &self.poles {
            if mu.is_zero() {
                continue;
            }
            // (λ−μ)^{−m} = (−μ)^{−m} Σ_j C(m+j−1, j) (λ/μ)^j
            let minv = mu.inv()?;
            let lead = mu.neg().inv()?.pow(*m);
            let mut f = vec![C::S::zero(); k + 1];
            let mut binom = one.clone();
            let mut mpow = one.clone();
            for (j, fj) in f.iter_mut().enumerate() {
                if j > 0 {
                    binom = binom
                        .scale(&C::S::from_i64((*m as i64) + j as i64 - 1))
                        .scale(&C::S::from_ratio(1, j as i64));
                    mpow = mpow.mul(&minv);
                }
                *fj = lead.mul(&binom).mul(&mpow);
            }
            let mut next = vec![C::S::zero(); k + 1];
            for i in 0..=k {
                for j in 0..=(k - i) {
                    next[i + j].add_assign(&series[i].mul(&f[j]));
                }
            }
            series = next;
        }
        let mut out = self.zero.clone();
        for (i, c) in self.num.iter().enumerate().take(k + 1) {
            out.add_assign(&c.scale(&series[k - i]));
        }
        Ok(out)
    }
}

impl<C: Coeff> Coeff for RationalLambda<C> {
    type S = C::S;

    fn is_zero(&self) -> bool {
        self.num.is_empty()
    }

    fn add(&self, o: &Self) -> Self {
        if self.is_zero() {
            return o.clone();
        }
        if o.is_zero() {
            return self.clone();
        }
        let (a, b, poles) = self.common(o);
        let len = a.len().max(b.len());
        let mut num = vec![self.zero.clone(); len];
        for (i, c) in a.iter().enumerate() {
            num[i].add_assign(c);
        }
        for (i, c) in b.iter().enumerate() {
            num[i].add_assign(c);
        }
        trim(&mut num);
        self.rebuild(num, poles)
    }

    fn neg(&self) -> Self {
        RationalLambda {
            num: self.num.iter().map(|c| c.neg()).collect(),
            poles: self.poles.clone(),
            zero: self.zero.clone(),
        }
    }

    fn mul(&self, o: &Self) -> Self {
        if self.is_zero() || o.is_zero() {
            return self.zero_like();
        }
        let mut num = vec![self.zero.clone(); self.num.len() + o.num.len() - 1];
        for (i, a) in self.num.iter().enumerate() {
            for (j, b) in o.num.iter().enumerate() {
                num[i + j].add_assign(&a.mul(b));
            }
        }
        trim(&mut num);
        let mut poles = self.poles.clone();
        for (r, m) in &o.poles {
            match poles.iter_mut().find(|(x, _)| same_root(x, r)) {
                Some(p) => p.1 += m,
                None => poles.push((r.clone(), *m)),
            }
        }
        self.rebuild(num, poles)
    }

    fn scale(&self, s: &C::S) -> Self {
        let mut num: Vec<C> = self.num.iter().map(|c| c.scale(s)).collect();
        trim(&mut num);
        self.rebuild(num, self.poles.clone())
    }

    fn adjoint(&self) -> Self {
        // λ is a real formal variable and every root is real
        RationalLambda {
            num: self.num.iter().map(|c| c.adjoint()).collect(),
            poles: self.poles.clone(),
            zero: self.zero.clone(),
        }
    }

    fn zero_like(&self) -> Self {
        RationalLambda { num: Vec::new(), poles: Vec::new(), zero: self.zero.clone() }
    }

    fn scalar_like(&self, s: C::S) -> Self {
        Self::constant(self.zero.scalar_like(s))
    }

    fn magnitude(&self) -> f64 {
        self.num.iter().map(|c| c.magnitude()).fold(0.0, f64::max)
    }

    fn approx_eq(&self, o: &Self, scale: f64) -> bool {
        if C::S::EXACT {
            return self == o;
        }
        let (a, b, _) = self.common(o);
        let len = a.len().max(b.len());
        (0..len).all(|i| {
            let x = a.get(i).cloned().unwrap_or_else(|| self.zero.clone());
            let y = b.get(i).cloned().unwrap_or_else(|| self.zero.clone());
            x.approx_eq(&y, scale)
        })
    }
}

/// Residue at λ = 0 of λ^q · r(λ).
pub fn residue_at_zero<C: Coeff>(r: &RationalLambda<C>, q: u32) -> Result<C> {
    let m0 = r.pole_order_at_zero();
    if m0 <= q {
        return Ok(r.zero.clone());
    }
    r.regular_taylor((m0 - q - 1) as usize)
}

/// Checks that every nonzero pole lies outside the contour |λ| = min(2aᵢ)/2.
pub fn check_poles<C: Coeff>(m: &ModelSpec<C::S>, r: &RationalLambda<C>) -> Result<()> {
    let radius = m.gap() / 2.0;
    for (mu, _) in &r.poles {
        if !mu.is_zero() && mu.to_c64().norm() <= radius {
            return Err(Error::PoleInsideContour(mu.to_string()));
        }
    }
    Ok(())
}

/// Multiplies each β-term by 1/(λ − 2β·a). The β = 0 part is multiplied by
/// 1/λ when `n_branch` is set and dropped otherwise.
pub fn resolvent<C: Coeff>(
    m: &ModelSpec<C::S>,
    nk: &NormalKernel<RationalLambda<C>>,
    n_branch: bool,
) -> NormalKernel<RationalLambda<C>> {
    let n = nk.n;
    let mut p = Poly::zero(4 * n);
    for (e, c) in &nk.poly.terms {
        let beta = &e[..n];
        if beta.iter().all(|&x| x == 0) && !n_branch {
            continue;
        }
        p.add_term(e.clone(), c.div_by_linear(&m.eigenvalue(beta)));
    }
    NormalKernel { n, poly: p }
}

/// Power series in λ truncated after a fixed order.
#[derive(Clone, Debug, PartialEq)]
pub struct Series<C: Coeff> {
    c: Vec<C>,
}

impl<C: Coeff> Series<C> {
    /// c·λ⁰ with terms kept up to λ^order.
    pub fn constant(c: C, order: usize) -> Self {
        let mut v = vec![c.zero_like(); order + 1];
        v[0] = c;
        Series { c: v }
    }

    pub fn order(&self) -> usize {
        self.c.len() - 1
    }

    pub fn coeff(&self, k: usize) -> &C {
        &self.c[k]
    }

    pub fn scale_series(&self, s: &[C::S]) -> Self {
        let k = self.order();
        let mut v = vec![self.c[0].zero_like(); k + 1];
        for i in 0..=k {
            if self.c[i].is_zero() {
                continue;
            }
            for j in 0..=(k - i) {
                v[i + j].add_assign(&self.c[i].scale(&s[j]));
            }
        }
        Series { c: v }
    }
}

impl<C: Coeff> Coeff for Series<C> {
    type S = C::S;

    fn is_zero(&self) -> bool {
        self.c.iter().all(|c| c.is_zero())
    }

    fn add(&self, o: &Self) -> Self {
        Series { c: self.c.iter().zip(&o.c).map(|(a, b)| a.add(b)).collect() }
    }

    fn neg(&self) -> Self {
        Series { c: self.c.iter().map(|a| a.neg()).collect() }
    }

    fn mul(&self, o: &Self) -> Self {
        let k = self.order();
        let mut v = vec![self.c[0].zero_like(); k + 1];
        for i in 0..=k {
            if self.c[i].is_zero() {
                continue;
            }
            for j in 0..=(k - i) {
                if !o.c[j].is_zero() {
                    v[i + j].add_assign(&self.c[i].mul(&o.c[j]));
                }
            }
        }
        Series { c: v }
    }

    fn scale(&self, s: &C::S) -> Self {
        Series { c: self.c.iter().map(|a| a.scale(s)).collect() }
    }

    fn adjoint(&self) -> Self {
        Series { c: self.c.iter().map(|a| a.adjoint()).collect() }
    }

    fn zero_like(&self) -> Self {
        Series { c: vec![self.c[0].zero_like(); self.c.len()] }
    }

    fn scalar_like(&self, s: C::S) -> Self {
        Self::constant(self.c[0].scalar_like(s), self.order())
    }

    fn magnitude(&self) -> f64 {
        self.c.iter().map(|c| c.magnitude()).fold(0.0, f64::max)
    }

    fn approx_eq(&self, o: &Self, scale: f64) -> bool {
        self.c.iter().zip(&o.c).all(|(a, b)| a.approx_eq(b, scale))
    }

    fn add_assign(&mut self, o: &Self) {
        for (a, b) in self.c.iter_mut().zip(&o.c) {
            a.add_assign(b);
        }
    }
}

/// (λ − ℒ₀)⁻¹P^{N⊥} as a Taylor series at λ = 0: each β ≠ 0 term is
/// multiplied by −Σ_k λ^k/μ^{k+1} with μ = 2β·a; the β = 0 part is dropped.
pub fn perp_resolvent_series<C: Coeff>(
    m: &ModelSpec<C::S>,
    nk: &NormalKernel<Series<C>>,
) -> Result<NormalKernel<Series<C>>> {
    let n = nk.n;
    let mut p = Poly::zero(4 * n);
    for (e, c) in &nk.poly.terms {
        let beta = &e[..n];
        if beta.iter().all(|&x| x == 0) {
            continue;
        }
        let minv = m.eigenvalue(beta).inv()?;
        let mut s = Vec::with_capacity(c.order() + 1);
        let mut pw = minv.neg();
        for _ in 0..=c.order() {
            s.push(pw.clone());
            pw = pw.mul(&minv);
        }
        p.add_term(e.clone(), c.scale_series(&s));
    }
    Ok(NormalKernel { n, poly: p })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{frac, int, Rat};

    fn inv_lambda(mu: i64) -> RationalLambda<Rat> {
        RationalLambda::constant(int::<Rat>(1)).div_by_linear(&int(mu))
    }

    #[test]
    fn residue_examples() {
        assert_eq!(residue_at_zero(&inv_lambda(0), 0).unwrap(), int(1));
        let r = inv_lambda(0).mul(&inv_lambda(6));
        assert_eq!(residue_at_zero(&r, 0).unwrap(), frac(-1, 6));
        let r2 = inv_lambda(0).mul(&inv_lambda(0));
        assert_eq!(residue_at_zero(&r2, 1).unwrap(), int(1));
        assert_eq!(residue_at_zero(&r2, 2).unwrap(), int(0));
    }

    #[test]
    fn multiplicities_accumulate() {
        let r = inv_lambda(4).mul(&inv_lambda(4));
        assert_eq!(r.poles(), &[(int::<Rat>(4), 2)]);
    }

    #[test]
    fn reduction_cancels_factors() {
        // (λ−2)/((λ−2)λ) = 1/λ
        let num = RationalLambda::constant(int::<Rat>(-2))
            .add(&RationalLambda::constant(int::<Rat>(1)).mul(&lambda()));
        let r = num.mul(&inv_lambda(2)).mul(&inv_lambda(0));
        assert_eq!(r, inv_lambda(0));
        // 1/λ − 1/(λ−3) = −3/(λ(λ−3))
        let d = inv_lambda(0).sub(&inv_lambda(3));
        assert_eq!(d, inv_lambda(0).mul(&inv_lambda(3)).scale(&int(-3)));
    }

    fn lambda() -> RationalLambda<Rat> {
        RationalLambda { num: vec![int(0), int(1)], poles: vec![], zero: int(0) }
    }

    #[test]
    fn series_matches_partial_fractions() {
        // residue of λ^{-2}/(λ−5)^2 at 0 is d/dλ (λ−5)^{-2} at 0 = −2/(−5)^3
        let r = inv_lambda(0).mul(&inv_lambda(0)).mul(&inv_lambda(5)).mul(&inv_lambda(5));
        assert_eq!(residue_at_zero(&r, 0).unwrap(), frac(2, 125));
    }

    #[test]
    fn series_truncates() {
        let a = Series { c: vec![int::<Rat>(1), int(2), int(3)] };
        let b = Series { c: vec![int::<Rat>(0), int(1), int(1)] };
        assert_eq!(a.mul(&b), Series { c: vec![int(0), int(1), int(3)] });
    }
}
