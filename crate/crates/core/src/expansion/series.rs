//! The recursion f_r = (λ − ℒ₀)⁻¹ Σ_j 𝒪_j f_{r−j} applied to P^N, with
//! coefficients rational in λ, and the pole-order bounds at λ = 0.

use crate::error::{Error, Result};
use crate::poly::Poly;
use crate::scalar::Coeff;
use crate::wick::lambda::check_poles;
use crate::wick::{
    from_normal, project_n, residue_at_zero, resolvent, to_normal, DiffOp, KernelPoly, ModelSpec, NormalKernel, RationalLambda,
};

type RL<C> = RationalLambda<C>;

/// Observed pole orders at λ = 0 for one r, with the bounds they must meet.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PoleDiagnostic {
    pub r: usize,
    /// Order of g_r = P^N f_r P^N; bounded by [r/2] + 1.
    pub g_order: u32,
    pub g_bound: u32,
    /// Order of f⊥_r; bounded by [(r+1)/2].
    pub perp_order: u32,
    pub perp_bound: u32,
}

/// f_r·P^N for r = 0..=r_max, in normal form.
#[derive(Clone, Debug)]
pub struct SeriesTerms<C: Coeff> {
    pub terms: Vec<NormalKernel<RL<C>>>,
    pub diagnostics: Vec<PoleDiagnostic>,
}

fn pole_orders<C: Coeff>(nk: &NormalKernel<RL<C>>) -> (u32, u32) {
    let n = nk.n;
    let mut g = 0;
    let mut perp = 0;
    for (e, c) in &nk.poly.terms {
        let o = c.pole_order_at_zero();
        if e[..n].iter().all(|&x| x == 0) {
            g = g.max(o);
        } else {
            perp = perp.max(o);
        }
    }
    (g, perp)
}

/// Runs the recursion and records the pole structure at λ = 0. The bounds are
/// asserted when P^N𝒪₁P^N = 0, the hypothesis under which they hold.
pub fn compute_series<C: Coeff>(
    m: &ModelSpec<C::S>,
    ops: &[Option<DiffOp<C>>],
    one: C,
    r_max: usize,
) -> Result<SeriesTerms<C>> {
    let n = m.n();
    let lifted: Vec<Option<DiffOp<RL<C>>>> =
        ops.iter().map(|o| o.as_ref().map(|o| o.map(|c| RL::constant(c.clone())))).collect();
    let pn = KernelPoly::pn(n, one.clone());
    let bounded = match ops.first() {
        Some(Some(o1)) => project_n(m, &o1.apply(m, &pn)).is_zero(),
        _ => true,
    };
    let seed = to_normal(m, &KernelPoly::pn(n, RL::constant(one)));
    let mut terms = vec![resolvent(m, &seed, true)];
    let mut diagnostics = Vec::new();
    for r in 0..=r_max {
        if r > 0 {
            let mut acc: KernelPoly<RL<C>> = KernelPoly::zero(n);
            for j in 1..=r {
                let prev = &terms[r - j];
                if prev.is_zero() {
                    continue;
                }
                let op = lifted.get(j - 1).and_then(Option::as_ref).ok_or(Error::MissingOperator(j))?;
                acc = acc.add(&op.apply(m, &from_normal(m, prev)));
            }
            terms.push(resolvent(m, &to_normal(m, &acc), true));
        }
        let nk = &terms[r];
        for c in nk.poly.terms.values() {
            check_poles(m, c)?;
        }
        let (g_order, perp_order) = pole_orders(nk);
        let d = PoleDiagnostic {
            r,
            g_order,
            g_bound: (r / 2 + 1) as u32,
            perp_order,
            perp_bound: r.div_ceil(2) as u32,
        };
        if bounded && d.g_order > d.g_bound {
            return Err(Error::PoleOrder { r, found: d.g_order as usize, bound: d.g_bound as usize });
        }
        if bounded && d.perp_order > d.perp_bound {
            return Err(Error::PoleOrder { r, found: d.perp_order as usize, bound: d.perp_bound as usize });
        }
        diagnostics.push(d);
    }
    Ok(SeriesTerms { terms, diagnostics })
}

/// Res_{λ=0} λ^q·(f_r P^N) as a kernel.
pub fn residue_kernel<C: Coeff>(m: &ModelSpec<C::S>, nk: &NormalKernel<RL<C>>, q: u32) -> Result<KernelPoly<C>> {
    let n = nk.n;
    let mut p = Poly::zero(4 * n);
    for (e, c) in &nk.poly.terms {
        let v = residue_at_zero(c, q)?;
        if !v.is_zero() {
            p.add_term(e.clone(), v);
        }
    }
    Ok(from_normal(m, &NormalKernel { n, poly: p }))
}
