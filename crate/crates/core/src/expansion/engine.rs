//! F_{q,r} by residue extraction, expanded over P^N-factorizations.
//!
//! With R(λ) = P^N/λ + R⊥(λ), the t^r coefficient of (λ − ℒ_t)⁻¹ is a sum of
//! words R𝒪_{j₁}R⋯𝒪_{j_k}R. Only words with more than q factors P^N/λ have a
//! residue against λ^q. Splitting a word at its P^N factors gives
//!
//!   (left piece)·P^N (P^N·middle·P^N) ⋯ P^N·(right piece)
//!
//! and R⊥ is expanded as −Σ_k λ^k ℒ₀^{−k−1}P^{N⊥}, so the residue is a fixed
//! Taylor coefficient of the composed series. Pieces of equal weight are summed
//! before composing.

use std::cell::OnceCell;

use crate::error::{Error, Result};
use crate::scalar::Coeff;
use crate::wick::lambda::perp_resolvent_series;
use crate::wick::{compose, from_normal, project_n, to_normal, DiffOp, KernelPoly, ModelSpec, Series};

type SK<C> = KernelPoly<Series<C>>;
type Piece<C> = Result<SK<C>>;

fn is_known_zero<C: Coeff>(p: &Piece<C>) -> bool {
    matches!(p, Ok(k) if k.is_zero())
}

/// Bilinear combination honoring the missing-operator policy: a known-zero
/// factor makes the product zero, otherwise any error propagates.
fn combine<C: Coeff>(a: &Piece<C>, b: &Piece<C>, zero: &SK<C>, f: impl FnOnce(&SK<C>, &SK<C>) -> Result<SK<C>>) -> Piece<C> {
    if is_known_zero(a) || is_known_zero(b) {
        return Ok(zero.clone());
    }
    match (a, b) {
        (Ok(x), Ok(y)) => f(x, y),
        (Err(e), _) | (_, Err(e)) => Err(e.clone()),
    }
}

/// op·prev, where a missing operator only matters if prev is not known zero.
fn through_op<C: Coeff>(
    op: Option<&DiffOp<Series<C>>>,
    j: usize,
    prev: &Piece<C>,
    zero: &SK<C>,
    f: impl FnOnce(&DiffOp<Series<C>>, &SK<C>) -> Result<SK<C>>,
) -> Piece<C> {
    match (op, prev) {
        (_, Ok(k)) if k.is_zero() => Ok(zero.clone()),
        (None, _) => Err(Error::MissingOperator(j)),
        (Some(_), Err(e)) => Err(e.clone()),
        (Some(o), Ok(k)) => f(o, k),
    }
}

fn sum<C: Coeff>(a: Piece<C>, b: Piece<C>) -> Piece<C> {
    Ok(a?.add(&b?))
}

/// Word-expansion engine for one model and operator list; `ops[j − 1]` is 𝒪_j.
/// Pieces are built on first use, so pairs that never reach a heavy piece
/// stay cheap.
pub struct Engine<'a, C: Coeff> {
    m: &'a ModelSpec<C::S>,
    order: usize,
    zero: SK<C>,
    pn: SK<C>,
    fwd: Vec<Option<DiffOp<Series<C>>>>,
    adj: Vec<Option<DiffOp<Series<C>>>>,
    left: Vec<OnceCell<Piece<C>>>,
    adj_chain: Vec<OnceCell<Piece<C>>>,
    right: Vec<OnceCell<Piece<C>>>,
    mid: Vec<OnceCell<Piece<C>>>,
}

impl<'a, C: Coeff> Engine<'a, C> {
    /// Prepares pieces up to weight `r_max`; `one` is the identity coefficient.
    pub fn new(m: &'a ModelSpec<C::S>, ops: &[Option<DiffOp<C>>], one: C, r_max: usize) -> Self {
        let n = m.n();
        let order = r_max;
        let lift = |o: &DiffOp<C>| o.map(|c| Series::constant(c.clone(), order));
        let fwd = ops.iter().map(|o| o.as_ref().map(lift)).collect();
        let adj = ops.iter().map(|o| o.as_ref().map(|o| lift(&o.adjoint(m)))).collect();
        let cells = || (0..=r_max).map(|_| OnceCell::new()).collect::<Vec<_>>();
        Engine {
            m,
            order,
            zero: KernelPoly::zero(n),
            pn: KernelPoly::pn(n, Series::constant(one, order)),
            fwd,
            adj,
            left: cells(),
            adj_chain: cells(),
            right: cells(),
            mid: cells(),
        }
    }

    pub fn r_max(&self) -> usize {
        self.order
    }

    fn perp(&self, k: &SK<C>) -> Result<SK<C>> {
        Ok(from_normal(self.m, &perp_resolvent_series(self.m, &to_normal(self.m, k))?))
    }

    /// R⊥𝒪_{j₁}R⊥⋯𝒪_{j_k}P^N summed over sequences of total weight w.
    fn chain(&self, cells: &[OnceCell<Piece<C>>], list: &[Option<DiffOp<Series<C>>>], w: usize) -> Piece<C> {
        if let Some(p) = cells[w].get() {
            return p.clone();
        }
        let value = if w == 0 {
            Ok(self.pn.clone())
        } else {
            // highest operator first, so a missing one is found before heavy work
            let mut acc: Piece<C> = Ok(self.zero.clone());
            for j in (1..=w).rev() {
                let prev = self.chain(cells, list, w - j);
                let op = list.get(j - 1).and_then(Option::as_ref);
                let term = through_op(op, j, &prev, &self.zero, |o, k| self.perp(&o.apply(self.m, k)));
                acc = sum(acc, term);
                if acc.is_err() {
                    break;
                }
            }
            acc
        };
        cells[w].get_or_init(|| value).clone()
    }

    fn left(&self, w: usize) -> Piece<C> {
        self.chain(&self.left, &self.fwd, w)
    }

    fn right(&self, w: usize) -> Piece<C> {
        if let Some(p) = self.right[w].get() {
            return p.clone();
        }
        let value = self.chain(&self.adj_chain, &self.adj, w).map(|k| k.adjoint());
        self.right[w].get_or_init(|| value).clone()
    }

    fn mid(&self, v: usize) -> Piece<C> {
        if v == 0 {
            return Ok(self.zero.clone());
        }
        if let Some(p) = self.mid[v].get() {
            return p.clone();
        }
        let mut acc: Piece<C> = Ok(self.zero.clone());
        for j in (1..=v).rev() {
            let prev = self.left(v - j);
            let op = self.fwd.get(j - 1).and_then(Option::as_ref);
            let term = through_op(op, j, &prev, &self.zero, |o, k| Ok(project_n(self.m, &o.apply(self.m, k))));
            acc = sum(acc, term);
            if acc.is_err() {
                break;
            }
        }
        self.mid[v].get_or_init(|| acc).clone()
    }

    /// The summed left piece of weight w applied to P^N (the f⊥ recursion).
    pub fn left_piece(&self, w: usize) -> Result<KernelPoly<Series<C>>> {
        self.left(w)
    }

    /// F_{q,r} as a kernel.
    pub fn f(&self, q: usize, r: usize) -> Result<KernelPoly<C>> {
        if r > self.order {
            return Err(Error::DimensionMismatch(format!("engine prepared up to r = {}", self.order)));
        }
        let n = self.m.n();
        if q > r {
            return Ok(KernelPoly::zero(n));
        }
        let mid_min = if self.order == 0 || is_known_zero(&self.mid(1)) { 2 } else { 1 };
        // a state (s, w) still has room for the middles it needs
        let reachable = |s: usize, w: usize| s > q || r - w >= mid_min * (q + 1 - s);
        let smax = r + 1;
        let mut states: Vec<Vec<Option<Piece<C>>>> = vec![vec![None; r + 1]; smax + 1];
        for w in 0..=r {
            if reachable(1, w) {
                states[1][w] = Some(self.left(w));
            }
        }
        for s in 1..smax {
            for w in 0..=r {
                let Some(a) = states[s][w].clone() else { continue };
                if is_known_zero(&a) {
                    continue;
                }
                for v in 1..=(r - w) {
                    if !reachable(s + 1, w + v) {
                        continue;
                    }
                    let t = combine(&a, &self.mid(v), &self.zero, |x, y| Ok(compose(self.m, x, y)));
                    if is_known_zero(&t) {
                        continue;
                    }
                    let slot = &mut states[s + 1][w + v];
                    *slot = Some(match slot.take() {
                        None => t,
                        Some(prev) => sum(prev, t),
                    });
                }
            }
        }
        // an error that no known-zero factor absorbs decides the result
        for row in states.iter().skip(q + 1) {
            for (w, a) in row.iter().enumerate() {
                let Some(a) = a else { continue };
                if is_known_zero(a) {
                    continue;
                }
                let b = self.right(r - w);
                if is_known_zero(&b) {
                    continue;
                }
                if let Err(e) = a.as_ref().and(b.as_ref()) {
                    return Err(e.clone());
                }
            }
        }
        let mut total: Result<KernelPoly<C>> = Ok(KernelPoly::zero(n));
        for (s, row) in states.iter().enumerate().skip(q + 1) {
            for (w, a) in row.iter().enumerate() {
                let Some(a) = a else { continue };
                let k = combine(a, &self.right(r - w), &self.zero, |x, y| Ok(compose(self.m, x, y)));
                let t = s - q - 1;
                let part = k.map(|k| {
                    let mut out = k.map(|c| c.coeff(t).clone());
                    out.prune();
                    out
                });
                total = match (total, part) {
                    (Ok(x), Ok(y)) => Ok(x.add(&y)),
                    (Err(e), _) | (_, Err(e)) => Err(e),
                };
            }
        }
        total
    }
}

/// F_{q,r} for one (q, r).
pub fn compute_f<C: Coeff>(m: &ModelSpec<C::S>, ops: &[Option<DiffOp<C>>], one: C, q: usize, r: usize) -> Result<KernelPoly<C>> {
    Engine::new(m, ops, one, r).f(q, r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{int, Rat};
    use crate::wick::{inv_l0_perp, Gen};

    fn model() -> ModelSpec<Rat> {
        ModelSpec::new(vec![int(2)]).unwrap()
    }

    #[test]
    fn leading_term_is_pn() {
        let m = model();
        let f = compute_f(&m, &[], int::<Rat>(1), 0, 0).unwrap();
        assert_eq!(f, KernelPoly::pn(1, int(1)));
    }

    #[test]
    fn constant_perturbation() {
        // 𝒪₁ = c: (λ − ℒ₀ − tc)⁻¹ shifts the eigenvalue, F_{q,r} = C(q,r) c^r·P^N
        let m = model();
        let ops = vec![Some(DiffOp::scalar(1, int::<Rat>(3)))];
        let e = Engine::new(&m, &ops, int(1), 3);
        assert_eq!(e.f(0, 1).unwrap(), KernelPoly::zero(1));
        assert_eq!(e.f(1, 1).unwrap(), KernelPoly::pn(1, int(3)));
        assert_eq!(e.f(2, 2).unwrap(), KernelPoly::pn(1, int(9)));
        assert_eq!(e.f(3, 2).unwrap(), KernelPoly::zero(1));
    }

    #[test]
    fn first_order_matches_direct_assembly() {
        let m = model();
        let o1 = crate::wick::normal_order(&m, int::<Rat>(1), &[Gen::Z(0), Gen::B(0)])
            .unwrap()
            .add(&crate::wick::normal_order(&m, int::<Rat>(1), &[Gen::Bp(0), Gen::Zb(0)]).unwrap());
        let pn = KernelPoly::pn(1, int::<Rat>(1));
        let k2 = inv_l0_perp(&m, &o1.apply(&m, &pn)).unwrap();
        let k1 = inv_l0_perp(&m, &o1.adjoint(&m).apply(&m, &pn)).unwrap().adjoint();
        let direct = k1.add(&k2).neg();
        let got = compute_f(&m, &[Some(o1)], int(1), 0, 1).unwrap();
        assert_eq!(got, direct);
    }

    #[test]
    fn missing_operator_is_reported_only_when_needed() {
        let m = model();
        let o1 = DiffOp::generator(1, Gen::B(0), int::<Rat>(1));
        let ops = vec![Some(o1), None];
        assert!(matches!(compute_f(&m, &ops, int(1), 0, 2), Err(Error::MissingOperator(2))));
        // b P^N = a(z̄ − z̄')P^N has no P^N component, so F_{1,1} vanishes without 𝒪₂
        assert!(compute_f(&m, &ops, int(1), 1, 1).unwrap().is_zero());
    }
}
