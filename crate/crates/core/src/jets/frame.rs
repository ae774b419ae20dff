//! Real frame e₁…e₂ₙ versus complex frame ∂/∂zᵢ, ∂/∂z̄ᵢ, and polynomial
//! contractions of dense tensors.

use crate::poly::Poly;
use crate::scalar::Scalar;

/// Index conventions: real index 2j is e_{2j+1} (1-based), 2j+1 is e_{2j+2};
/// z_j = Z_{2j} + i Z_{2j+1}; polynomials in Z live over `[z | z̄]`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct FrameMap {
    pub n: usize,
}

impl FrameMap {
    pub fn new(n: usize) -> Self {
        FrameMap { n }
    }

    pub fn dim(&self) -> usize {
        2 * self.n
    }

    /// Real components of ∂/∂z_j = ½(e_{2j−1} − i e_{2j}).
    pub fn dz<S: Scalar>(&self, j: usize) -> Vec<S> {
        let mut v = vec![S::zero(); self.dim()];
        v[2 * j] = S::from_ratio(1, 2);
        v[2 * j + 1] = S::imag_unit().scale(&S::from_ratio(-1, 2));
        v
    }

    /// Real components of ∂/∂z̄_j = ½(e_{2j−1} + i e_{2j}).
    pub fn dzb<S: Scalar>(&self, j: usize) -> Vec<S> {
        let mut v = vec![S::zero(); self.dim()];
        v[2 * j] = S::from_ratio(1, 2);
        v[2 * j + 1] = S::imag_unit().scale(&S::from_ratio(1, 2));
        v
    }

    /// Real coordinate Z_k as a polynomial in (z, z̄).
    pub fn coord<S: Scalar>(&self, k: usize) -> Poly<S> {
        let n = self.n;
        let j = k / 2;
        let zj = Poly::var(2 * n, j, S::one());
        let zbj = Poly::var(2 * n, n + j, S::one());
        let half = S::from_ratio(1, 2);
        if k % 2 == 0 {
            zj.add(&zbj).scale(&half)
        } else {
            zj.sub(&zbj).scale(&S::imag_unit().neg().mul(&half))
        }
    }

    /// The radial field ℛ = Σ Z_k e_k as a vector of polynomials.
    pub fn radial<S: Scalar>(&self) -> Vec<Poly<S>> {
        (0..self.dim()).map(|k| self.coord(k)).collect()
    }

    /// The field z = Σ z_j ∂/∂z_j.
    pub fn z_field<S: Scalar>(&self) -> Vec<Poly<S>> {
        self.weighted_field(false)
    }

    /// The field z̄ = Σ z̄_j ∂/∂z̄_j.
    pub fn zb_field<S: Scalar>(&self) -> Vec<Poly<S>> {
        self.weighted_field(true)
    }

    fn weighted_field<S: Scalar>(&self, bar: bool) -> Vec<Poly<S>> {
        let n = self.n;
        let mut out = vec![Poly::zero(2 * n); self.dim()];
        for j in 0..n {
            let v: Vec<S> = if bar { self.dzb(j) } else { self.dz(j) };
            let var = Poly::var(2 * n, if bar { n + j } else { j }, S::one());
            for (k, c) in v.iter().enumerate() {
                out[k] = out[k].add(&var.scale(c));
            }
        }
        out
    }

    /// A constant vector as polynomials.
    pub fn constant<S: Scalar>(&self, v: &[S]) -> Vec<Poly<S>> {
        v.iter().map(|c| Poly::constant(2 * self.n, c.clone())).collect()
    }

    /// ∂/∂Z_k of a polynomial over `[z | z̄]`.
    pub fn d_real<S: Scalar>(&self, p: &Poly<S>, k: usize) -> Poly<S> {
        let j = k / 2;
        let dz = p.deriv(j);
        let dzb = p.deriv(self.n + j);
        if k % 2 == 0 {
            dz.add(&dzb)
        } else {
            dz.sub(&dzb).scale(&S::imag_unit())
        }
    }
}

/// Σ_{i₁…i_r} T[i₁…i_r] · v₁[i₁]⋯v_r[i_r] for a dense row-major tensor and
/// polynomial-valued vectors.
pub fn contract<S: Scalar>(t: &[S], dim: usize, slots: &[&[Poly<S>]]) -> Poly<S> {
    let nvars = slots[0][0].nvars;
    let mut out = Poly::zero(nvars);
    let one = Poly::constant(nvars, S::one());
    rec(t, dim, slots, 0, 0, &one, &mut out);
    out
}

fn rec<S: Scalar>(
    t: &[S],
    dim: usize,
    slots: &[&[Poly<S>]],
    level: usize,
    offset: usize,
    acc: &Poly<S>,
    out: &mut Poly<S>,
) {
    if level == slots.len() {
        let c = &t[offset];
        if !c.is_zero() {
            out.add_assign(&acc.scale(c));
        }
        return;
    }
    let stride = dim.pow((slots.len() - level - 1) as u32);
    for i in 0..dim {
        let comp = &slots[level][i];
        if comp.is_zero() {
            continue;
        }
        let block = &t[offset + i * stride..offset + (i + 1) * stride];
        if block.iter().all(|c| c.is_zero()) {
            continue;
        }
        rec(t, dim, slots, level + 1, offset + i * stride, &acc.mul(comp), out);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{int, Coeff, Rat};

    #[test]
    fn radial_is_z_plus_zbar() {
        let f = FrameMap::new(2);
        let r = f.radial::<Rat>();
        let z = f.z_field::<Rat>();
        let zb = f.zb_field::<Rat>();
        for k in 0..4 {
            assert_eq!(r[k], z[k].add(&zb[k]));
        }
    }

    #[test]
    fn real_derivative_of_coordinates() {
        let f = FrameMap::new(2);
        for k in 0..4 {
            for l in 0..4 {
                let d = f.d_real(&f.coord::<Rat>(l), k);
                let expect = if k == l { int(1) } else { int(0) };
                assert_eq!(d.constant_term().cloned().unwrap_or(int(0)), expect);
            }
        }
    }

    #[test]
    fn frame_norms() {
        // ⟨∂z, ∂z̄⟩ = ½ and ⟨∂z, ∂z⟩ = 0 for the bilinear extension
        let f = FrameMap::new(1);
        let dz: Vec<Rat> = f.dz(0);
        let dzb: Vec<Rat> = f.dzb(0);
        let dot = |a: &[Rat], b: &[Rat]| a.iter().zip(b).fold(int::<Rat>(0), |s, (x, y)| s.add(&x.mul(y)));
        assert_eq!(dot(&dz, &dzb), Rat::from_ratio(1, 2));
        assert_eq!(dot(&dz, &dz), int(0));
    }
}
