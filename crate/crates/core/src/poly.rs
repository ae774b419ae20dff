//! Sparse multivariate polynomials with ordered (deterministic) storage.

use crate::scalar::{Coeff, Scalar, FLOAT_PRUNE};
use smallvec::SmallVec;
use std::collections::BTreeMap;

/// Exponent vector of a monomial.
pub type Exps = SmallVec<[u8; 16]>;

pub fn zero_exps(nvars: usize) -> Exps {
    SmallVec::from_elem(0, nvars)
}

pub fn unit_exps(nvars: usize, var: usize) -> Exps {
    let mut e = zero_exps(nvars);
    e[var] = 1;
    e
}

pub fn exps_add(a: &[u8], b: &[u8]) -> Exps {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

pub fn degree(e: &[u8]) -> usize {
    e.iter().map(|&x| x as usize).sum()
}

#[derive(Clone, Debug, PartialEq)]
pub struct Poly<C: Coeff> {
    pub nvars: usize,
    pub terms: BTreeMap<Exps, C>,
}

impl<C: Coeff> Poly<C> {
    pub fn zero(nvars: usize) -> Self {
        Poly { nvars, terms: BTreeMap::new() }
    }

    pub fn constant(nvars: usize, c: C) -> Self {
        Self::monomial(zero_exps(nvars), c)
    }

    pub fn monomial(e: Exps, c: C) -> Self {
        let mut p = Self::zero(e.len());
        p.add_term(e, c);
        p
    }

    pub fn var(nvars: usize, var: usize, one: C) -> Self {
        Self::monomial(unit_exps(nvars, var), one)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add_term(&mut self, e: Exps, c: C) {
        if c.is_zero() {
            return;
        }
        debug_assert_eq!(e.len(), self.nvars);
        use std::collections::btree_map::Entry;
        match self.terms.entry(e) {
            Entry::Vacant(v) => {
                v.insert(c);
            }
            Entry::Occupied(mut o) => {
                o.get_mut().add_assign(&c);
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    pub fn add_assign(&mut self, o: &Self) {
        for (e, c) in &o.terms {
            self.add_term(e.clone(), c.clone());
        }
    }

    pub fn add(&self, o: &Self) -> Self {
        let mut r = self.clone();
        r.add_assign(o);
        r
    }

    pub fn neg(&self) -> Self {
        self.map(|c| c.neg())
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.neg())
    }

    pub fn map<D: Coeff>(&self, f: impl Fn(&C) -> D) -> Poly<D> {
        let mut r = Poly::zero(self.nvars);
        for (e, c) in &self.terms {
            r.add_term(e.clone(), f(c));
        }
        r
    }

    pub fn scale(&self, s: &C::S) -> Self {
        self.map(|c| c.scale(s))
    }

    /// Left multiplication of every coefficient by `c`.
    pub fn lmul(&self, c: &C) -> Self {
        self.map(|x| c.mul(x))
    }

    /// Product; coefficients multiply as `self * o`.
    pub fn mul(&self, o: &Self) -> Self {
        assert_eq!(self.nvars, o.nvars);
        let mut r = Self::zero(self.nvars);
        for (e1, c1) in &self.terms {
            for (e2, c2) in &o.terms {
                r.add_term(exps_add(e1, e2), c1.mul(c2));
            }
        }
        r
    }

    pub fn mul_monomial(&self, e: &[u8]) -> Self {
        let mut r = Self::zero(self.nvars);
        for (e1, c1) in &self.terms {
            r.terms.insert(exps_add(e1, e), c1.clone());
        }
        r
    }

    pub fn pow(&self, k: u32, one: C) -> Self {
        let mut acc = Self::constant(self.nvars, one);
        for _ in 0..k {
            acc = acc.mul(self);
        }
        acc
    }

    /// Partial derivative in variable `var`.
    pub fn deriv(&self, var: usize) -> Self {
        let mut r = Self::zero(self.nvars);
        for (e, c) in &self.terms {
            let k = e[var];
            if k == 0 {
                continue;
            }
            let mut e2 = e.clone();
            e2[var] -= 1;
            r.add_term(e2, c.scale(&C::S::from_i64(k as i64)));
        }
        r
    }

    pub fn max_degree(&self) -> usize {
        self.terms.keys().map(|e| degree(e)).max().unwrap_or(0)
    }

    pub fn max_magnitude(&self) -> f64 {
        self.terms.values().map(|c| c.magnitude()).fold(0.0, f64::max)
    }

    /// Float mode: drop coefficients below `FLOAT_PRUNE` times the largest one.
    pub fn prune(&mut self) {
        if C::S::EXACT {
            return;
        }
        let m = self.max_magnitude();
        let cut = m * FLOAT_PRUNE;
        self.terms.retain(|_, c| c.magnitude() > cut);
    }

    /// Exact equality in exact modes, coefficientwise tolerance in float mode.
    pub fn approx_eq(&self, o: &Self) -> bool {
        if C::S::EXACT {
            return self == o;
        }
        let scale = self.max_magnitude().max(o.max_magnitude());
        let mut keys: Vec<&Exps> = self.terms.keys().chain(o.terms.keys()).collect();
        keys.sort();
        keys.dedup();
        keys.into_iter().all(|k| match (self.terms.get(k), o.terms.get(k)) {
            (Some(a), Some(b)) => a.approx_eq(b, scale),
            (Some(a), None) | (None, Some(a)) => a.approx_eq(&a.zero_like(), scale),
            (None, None) => true,
        })
    }

    /// Coefficient at the zero monomial.
    pub fn constant_term(&self) -> Option<&C> {
        self.terms.get(&zero_exps(self.nvars))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{int, Rat};

    #[test]
    fn product_rule_for_derivative() {
        let x = Poly::var(2, 0, int::<Rat>(1));
        let y = Poly::var(2, 1, int::<Rat>(1));
        let p = x.mul(&x).add(&y.scale(&int(3)));
        let q = x.mul(&y).add(&Poly::constant(2, int(2)));
        let lhs = p.mul(&q).deriv(0);
        let rhs = p.deriv(0).mul(&q).add(&p.mul(&q.deriv(0)));
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn cancellation_removes_terms() {
        let x = Poly::var(1, 0, int::<Rat>(1));
        assert!(x.sub(&x).is_zero());
    }
}
