//! Curvature and connection jets at a point, derived quantities and validation.

use super::frame::{contract, FrameMap};
use crate::error::{Error, Result};
use crate::scalar::{Coeff, Mat, Scalar};
use crate::wick::ModelSpec;

/// Dense tensors over real indices, row-major:
/// - `drl[j][k][l]` = ⟨(∇_j𝒥)e_k, e_l⟩
/// - `rtx[i][j][k][l]` = ⟨R^{TX}(e_i,e_j)e_k, e_l⟩
/// - `nnj[a][b][k][l]` = ⟨(∇∇𝒥)_{(e_a,e_b)}e_k, e_l⟩
/// - `re[i][j]` = R^E(e_i, e_j)
///
/// `d2rl`, `dtau`, `d2tau` and `nabla_j` are derived on construction.
#[derive(Clone, Debug, PartialEq)]
pub struct PointJets<S: Scalar> {
    pub n: usize,
    pub rank: usize,
    pub kahler: bool,
    pub a: Vec<S>,
    pub drl: Vec<S>,
    pub rtx: Vec<S>,
    pub nnj: Vec<S>,
    pub re: Vec<Mat<S>>,
    pub phi: Mat<S>,
    /// `d2rl[j][i][k][l]` = ∂_j∂_i (R^L(e_k,e_l)) at the point.
    pub d2rl: Vec<S>,
    pub dtau: Vec<S>,
    pub d2tau: Vec<S>,
    /// `nabla_j[i][k][l]` = ⟨(∇_i J)e_k, e_l⟩.
    pub nabla_j: Vec<S>,
}

/// r^X, |∇J|² and ϱ = |∇J|²/24.
#[derive(Clone, Debug, PartialEq)]
pub struct DerivedQuantities<S> {
    pub scalar_curvature: S,
    pub nabla_j_sq: S,
    pub rho: S,
}

/// Raw jet data before derivation.
#[derive(Clone, Debug)]
pub struct JetParts<S: Scalar> {
    pub n: usize,
    pub rank: usize,
    pub kahler: bool,
    pub a: Vec<S>,
    pub drl: Vec<S>,
    pub rtx: Vec<S>,
    pub nnj: Vec<S>,
    pub re: Vec<Mat<S>>,
    pub phi: Mat<S>,
}

fn check_len<T>(name: &str, v: &[T], len: usize) -> Result<()> {
    if v.len() == len {
        Ok(())
    } else {
        Err(Error::DimensionMismatch(format!("{name}: expected {len} entries, got {}", v.len())))
    }
}

impl<S: Scalar> PointJets<S> {
    pub fn new(p: JetParts<S>) -> Result<Self> {
        let d = 2 * p.n;
        if p.a.len() != p.n {
            return Err(Error::DimensionMismatch(format!("a: expected {} entries", p.n)));
        }
        check_len("dRL", &p.drl, d * d * d)?;
        check_len("RTX", &p.rtx, d * d * d * d)?;
        check_len("nnJ", &p.nnj, d * d * d * d)?;
        check_len("RE", &p.re, d * d)?;
        if p.phi.rank != p.rank || p.re.iter().any(|m| m.rank != p.rank) {
            return Err(Error::DimensionMismatch("bundle rank".into()));
        }
        ModelSpec::new(p.a.clone())?;
        let mut j = PointJets {
            n: p.n,
            rank: p.rank,
            kahler: p.kahler,
            a: p.a,
            drl: p.drl,
            rtx: p.rtx,
            nnj: p.nnj,
            re: p.re,
            phi: p.phi,
            d2rl: Vec::new(),
            dtau: Vec::new(),
            d2tau: Vec::new(),
            nabla_j: Vec::new(),
        };
        j.d2rl = j.derive_d2rl();
        j.dtau = j.derive_dtau();
        j.d2tau = j.derive_d2tau();
        j.nabla_j = j.derive_nabla_j()?;
        Ok(j)
    }

    /// All jets zero, Φ = φ·Id.
    pub fn flat(a: Vec<S>, rank: usize, kahler: bool, phi: S) -> Result<Self> {
        let n = a.len();
        let d = 2 * n;
        Self::new(JetParts {
            n,
            rank,
            kahler,
            a,
            drl: vec![S::zero(); d * d * d],
            rtx: vec![S::zero(); d * d * d * d],
            nnj: vec![S::zero(); d * d * d * d],
            re: vec![Mat::zeros(rank); d * d],
            phi: Mat::scalar(rank, phi),
        })
    }

    pub fn dim(&self) -> usize {
        2 * self.n
    }

    pub fn frame(&self) -> FrameMap {
        FrameMap::new(self.n)
    }

    pub fn model(&self) -> Result<ModelSpec<S>> {
        ModelSpec::new(self.a.clone())
    }

    /// Eigenvalue attached to real index k.
    fn ak(&self, k: usize) -> &S {
        &self.a[k / 2]
    }

    /// Matrix of 𝒥 (entry `[l*d + k]` = ⟨𝒥e_k, e_l⟩): 𝒥e_{2j−1} = −i a_j e_{2j}.
    pub fn jmat(&self) -> Vec<S> {
        let d = self.dim();
        let mut m = vec![S::zero(); d * d];
        let i = S::imag_unit();
        for j in 0..self.n {
            m[(2 * j + 1) * d + 2 * j] = i.mul(&self.a[j]).neg();
            m[2 * j * d + 2 * j + 1] = i.mul(&self.a[j]);
        }
        m
    }

    /// Matrix of J = i𝒥(𝒥²)^{−1/2}.
    pub fn j_complex_structure(&self) -> Vec<S> {
        let d = self.dim();
        let jm = self.jmat();
        let mut out = vec![S::zero(); d * d];
        for l in 0..d {
            for k in 0..d {
                let v = &jm[l * d + k];
                if !v.is_zero() {
                    out[l * d + k] = S::imag_unit().mul(v).mul(&self.ak(k).inv().expect("a > 0"));
                }
            }
        }
        out
    }

    /// Matrix of ∇_u𝒥.
    pub fn d_jmat(&self, u: usize) -> Vec<S> {
        let d = self.dim();
        let mut m = vec![S::zero(); d * d];
        for k in 0..d {
            for l in 0..d {
                m[l * d + k] = self.drl[(u * d + k) * d + l].clone();
            }
        }
        m
    }

    /// Matrix of (∇∇𝒥)_{(e_u, e_v)}.
    pub fn nn_jmat(&self, u: usize, v: usize) -> Vec<S> {
        let d = self.dim();
        let mut m = vec![S::zero(); d * d];
        for k in 0..d {
            for l in 0..d {
                m[l * d + k] = self.nnj[((u * d + v) * d + k) * d + l].clone();
            }
        }
        m
    }

    /// ⟨R(e_i,e_j)e_k, e_l⟩.
    pub fn r(&self, i: usize, j: usize, k: usize, l: usize) -> &S {
        let d = self.dim();
        &self.rtx[((i * d + j) * d + k) * d + l]
    }

    /// ∇_u(𝒥²) = (∇_u𝒥)𝒥 + 𝒥(∇_u𝒥).
    fn d_a(&self, u: usize) -> Vec<S> {
        let d = self.dim();
        let jm = self.jmat();
        let du = self.d_jmat(u);
        matadd(&matmul(&du, &jm, d), &matmul(&jm, &du, d))
    }

    fn derive_dtau(&self) -> Vec<S> {
        // τ = ½ tr (𝒥²)^{1/2}, so ∇τ = ½ tr[f'(𝒥²)∇(𝒥²)] with f' = 1/(2√·)
        let d = self.dim();
        (0..d)
            .map(|u| {
                let h = self.d_a(u);
                let mut s = S::zero();
                for k in 0..d {
                    s.add_assign(&h[k * d + k].mul(&self.ak(k).inv().expect("a > 0")));
                }
                s.scale(&S::from_ratio(1, 4))
            })
            .collect()
    }

    fn derive_d2tau(&self) -> Vec<S> {
        let d = self.dim();
        let jm = self.jmat();
        let ha: Vec<Vec<S>> = (0..d).map(|u| self.d_a(u)).collect();
        let mut out = vec![S::zero(); d * d];
        for u in 0..d {
            for v in 0..d {
                let nsym = matadd(&self.nn_jmat(u, v), &self.nn_jmat(v, u));
                let nsym: Vec<S> = nsym.iter().map(|x| x.scale(&S::from_ratio(1, 2))).collect();
                let du = self.d_jmat(u);
                let dv = self.d_jmat(v);
                let mut a2 = matadd(&matmul(&nsym, &jm, d), &matmul(&jm, &nsym, d));
                a2 = matadd(&a2, &matmul(&du, &dv, d));
                a2 = matadd(&a2, &matmul(&dv, &du, d));
                let mut s = S::zero();
                for k in 0..d {
                    let inv2a = self.ak(k).scale(&S::from_i64(2)).inv().expect("a > 0");
                    s.add_assign(&a2[k * d + k].mul(&inv2a));
                }
                // divided difference of f' at (a_k², a_l²): −1/(2a_k a_l(a_k + a_l))
                for k in 0..d {
                    for l in 0..d {
                        let x = ha[u][k * d + l].mul(&ha[v][l * d + k]);
                        if x.is_zero() {
                            continue;
                        }
                        let ak = self.ak(k);
                        let al = self.ak(l);
                        let den = ak.mul(al).mul(&ak.add(al)).scale(&S::from_i64(-2));
                        s.add_assign(&x.mul(&den.inv().expect("a > 0")));
                    }
                }
                out[u * d + v] = s.scale(&S::from_ratio(1, 2));
            }
        }
        out
    }

    fn derive_nabla_j(&self) -> Result<Vec<S>> {
        // J = i𝒥A^{−1/2}, A = 𝒥²; ∇J = i[(∇𝒥)A^{−1/2} + 𝒥 ∇A^{−1/2}] with
        // (∇A^{−1/2})_{kl} = −(∇A)_{kl}/(a_k a_l(a_k + a_l))
        let d = self.dim();
        let jm = self.jmat();
        let mut out = vec![S::zero(); d * d * d];
        for u in 0..d {
            let du = self.d_jmat(u);
            let h = self.d_a(u);
            let mut g = vec![S::zero(); d * d];
            for k in 0..d {
                for l in 0..d {
                    if h[k * d + l].is_zero() {
                        continue;
                    }
                    let ak = self.ak(k);
                    let al = self.ak(l);
                    let den = ak.mul(al).mul(&ak.add(al));
                    g[k * d + l] = h[k * d + l].mul(&den.inv()?).neg();
                }
            }
            let jg = matmul(&jm, &g, d);
            for l in 0..d {
                for k in 0..d {
                    let v = du[l * d + k].mul(&self.ak(k).inv()?).add(&jg[l * d + k]);
                    out[(u * d + k) * d + l] = S::imag_unit().mul(&v);
                }
            }
        }
        Ok(out)
    }

    fn derive_d2rl(&self) -> Vec<S> {
        let d = self.dim();
        let jm = self.jmat();
        // ⟨X, 𝒥e_l⟩ with X = R(e_a,e_b)e_c
        let rj = |a: usize, b: usize, c: usize, l: usize| {
            let mut s = S::zero();
            for m in 0..d {
                let j = &jm[m * d + l];
                if !j.is_zero() {
                    s.add_assign(&self.r(a, b, c, m).mul(j));
                }
            }
            s
        };
        let third = S::from_ratio(1, 3);
        let mut out = vec![S::zero(); d * d * d * d];
        for j in 0..d {
            for i in 0..d {
                for k in 0..d {
                    for l in 0..d {
                        let idx = ((j * d + i) * d + k) * d + l;
                        let minus = rj(j, i, k, l).add(&rj(j, k, i, l));
                        let plus = rj(j, i, l, k).add(&rj(j, l, i, k));
                        out[idx] = self.nnj[idx].add(&plus.sub(&minus).mul(&third));
                    }
                }
            }
        }
        out
    }

    /// Σ_j R^E(e_j, Je_j).
    pub fn re_trace_j(&self) -> Mat<S> {
        let d = self.dim();
        let jc = self.j_complex_structure();
        let mut s = Mat::zeros(self.rank);
        for j in 0..d {
            for m in 0..d {
                let c = &jc[m * d + j];
                if !c.is_zero() {
                    s.add_assign(&self.re[j * d + m].scale(c));
                }
            }
        }
        s
    }

    /// R^E(u, v) for complex vectors u, v given by real components.
    pub fn re_eval(&self, u: &[S], v: &[S]) -> Mat<S> {
        let d = self.dim();
        let mut s = Mat::zeros(self.rank);
        for i in 0..d {
            for j in 0..d {
                let c = u[i].mul(&v[j]);
                if !c.is_zero() {
                    s.add_assign(&self.re[i * d + j].scale(&c));
                }
            }
        }
        s
    }

    pub fn derived_quantities(&self) -> DerivedQuantities<S> {
        let d = self.dim();
        let mut r = S::zero();
        for i in 0..d {
            for j in 0..d {
                r.add_assign(self.r(i, j, i, j));
            }
        }
        let mut nj = S::zero();
        for x in &self.nabla_j {
            nj.add_assign(&x.mul(&x.conj()));
        }
        DerivedQuantities {
            scalar_curvature: r.neg(),
            rho: nj.scale(&S::from_ratio(1, 24)),
            nabla_j_sq: nj,
        }
    }

    /// Right side of the scalar-curvature identity for Kähler jets:
    /// 8⟨R(∂z_i,∂z̄_j)∂z_j, ∂z̄_i⟩ − ¼|∇J|².
    pub fn scalar_curvature_complex(&self) -> Result<S> {
        if !self.kahler {
            return Err(Error::NotKahler);
        }
        let f = self.frame();
        let d = self.dim();
        let mut s = S::zero();
        for i in 0..self.n {
            for j in 0..self.n {
                let slots = [f.constant(&f.dz(i)), f.constant(&f.dzb(j)), f.constant(&f.dz(j)), f.constant(&f.dzb(i))];
                let refs: Vec<&[_]> = slots.iter().map(|v| v.as_slice()).collect();
                let c = contract(&self.rtx, d, &refs);
                if let Some(v) = c.constant_term() {
                    s.add_assign(v);
                }
            }
        }
        let q = self.derived_quantities();
        Ok(s.scale(&S::from_i64(8)).sub(&q.nabla_j_sq.scale(&S::from_ratio(1, 4))))
    }

    /// Names of violated invariants; empty when the jets are consistent.
    pub fn validate(&self) -> Vec<String> {
        let d = self.dim();
        let mut bad = Vec::new();
        let zero = S::zero();
        let tol = self.scale_hint();
        let near = |x: &S, y: &S| x.sub(y).approx_eq(&zero, tol);
        let mut push = |name: &str, ok: bool| {
            if !ok && !bad.iter().any(|b| b == name) {
                bad.push(name.to_string());
            }
        };
        let idx3 = |a: usize, b: usize, c: usize| (a * d + b) * d + c;
        let idx4 = |a: usize, b: usize, c: usize, e: usize| ((a * d + b) * d + c) * d + e;
        for u in 0..d {
            for v in 0..d {
                for w in 0..d {
                    let t = &self.drl[idx3(u, v, w)];
                    push("RL antisymmetry", near(t, &self.drl[idx3(u, w, v)].neg()));
                    let cyc = t.add(&self.drl[idx3(v, w, u)]).add(&self.drl[idx3(w, u, v)]);
                    push("closedness", near(&cyc, &zero));
                    push("reality", near(&t.conj(), &t.neg()));
                    push("RL antisymmetry", near(&self.d2rl[idx4(u, v, w, w)], &zero));
                }
            }
        }
        for i in 0..d {
            for j in 0..d {
                for k in 0..d {
                    for l in 0..d {
                        let r = self.r(i, j, k, l);
                        push("RTX antisymmetry", near(r, &self.r(j, i, k, l).neg()));
                        push("RTX antisymmetry", near(r, &self.r(i, j, l, k).neg()));
                        push("pair symmetry", near(r, self.r(k, l, i, j)));
                        let b = r.add(self.r(j, k, i, l)).add(self.r(k, i, j, l));
                        push("Bianchi", near(&b, &zero));
                        push("RTX reality", near(&r.conj(), r));
                        let nn = &self.nnj[idx4(i, j, k, l)];
                        push("nnJ skew", near(nn, &self.nnj[idx4(i, j, l, k)].neg()));
                        let c = nn.add(&self.nnj[idx4(i, k, l, j)]).add(&self.nnj[idx4(i, l, j, k)]);
                        push("nnJ cyclic", near(&c, &zero));
                    }
                }
            }
        }
        let jm = self.jmat();
        for a in 0..d {
            for b in 0..d {
                let lhs = matsub(&self.nn_jmat(a, b), &self.nn_jmat(b, a));
                let rm = self.r_mat(a, b);
                let rhs = matsub(&matmul(&rm, &jm, d), &matmul(&jm, &rm, d));
                push("Ricci identity", lhs.iter().zip(&rhs).all(|(x, y)| near(x, y)));
            }
        }
        let jc = self.j_complex_structure();
        for u in 0..d {
            let nj = self.nabla_j_mat(u);
            let anti = matadd(&matmul(&jc, &nj, d), &matmul(&nj, &jc, d));
            push("nablaJ anticommutes", anti.iter().all(|x| near(x, &zero)));
            for k in 0..d {
                for l in 0..d {
                    push("nablaJ skew", near(&nj[l * d + k], &nj[k * d + l].neg()));
                }
            }
        }
        push("Phi Hermitian", self.phi.is_hermitian());
        for i in 0..d {
            for j in 0..d {
                let m = &self.re[i * d + j];
                push("RE anti-Hermitian", m.is_anti_hermitian());
                push("RE antisymmetry", m.approx_eq(&self.re[j * d + i].neg(), tol));
            }
        }
        if self.kahler {
            let two_pi = S::pi().map(|p| p.scale(&S::from_i64(2)));
            match two_pi {
                Ok(tp) => push("kahler a", self.a.iter().all(|x| near(x, &tp))),
                Err(_) => push("kahler a", false),
            }
            // ⟨(∇J)·,·⟩ of type (3,0)+(0,3)
            let jt = |t: &[S], a: usize, b: usize, c: usize, slot: usize| {
                let mut s = S::zero();
                for m in 0..d {
                    // J e_x = Σ_m J_{mx} e_m
                    let (x, y, z) = match slot {
                        0 => (m, b, c),
                        1 => (a, m, c),
                        _ => (a, b, m),
                    };
                    let src = [a, b, c][slot];
                    let jv = &jc[m * d + src];
                    if !jv.is_zero() {
                        s.add_assign(&t[idx3(x, y, z)].mul(jv));
                    }
                }
                s
            };
            for a in 0..d {
                for b in 0..d {
                    for c in 0..d {
                        let t0 = jt(&self.nabla_j, a, b, c, 0);
                        push("type (3,0)+(0,3)", near(&t0, &jt(&self.nabla_j, a, b, c, 1)));
                        push("type (3,0)+(0,3)", near(&t0, &jt(&self.nabla_j, a, b, c, 2)));
                    }
                }
            }
            // (∇∇J)J + J(∇∇J) = −{∇J, ∇J}, with ∇∇J = ∇∇𝒥 / (−2πi)
            if let Ok(tp) = S::pi().map(|p| p.scale(&S::from_i64(2))) {
                let c = tp.mul(&S::imag_unit()).neg();
                let cinv = c.inv().expect("nonzero");
                for u in 0..d {
                    for v in 0..d {
                        let nn: Vec<S> = self.nn_jmat(u, v).iter().map(|x| x.mul(&cinv)).collect();
                        let ju = self.nabla_j_mat(u);
                        let jv = self.nabla_j_mat(v);
                        let mut s = matadd(&matmul(&nn, &jc, d), &matmul(&jc, &nn, d));
                        s = matadd(&s, &matmul(&ju, &jv, d));
                        s = matadd(&s, &matmul(&jv, &ju, d));
                        push("second derivative of J^2 = -1", s.iter().all(|x| near(x, &zero)));
                    }
                }
            }
        }
        bad
    }

    fn scale_hint(&self) -> f64 {
        let m = |v: &[S]| v.iter().map(|x| x.magnitude()).fold(0.0, f64::max);
        m(&self.drl).max(m(&self.rtx)).max(m(&self.nnj)).max(m(&self.a)).max(1.0)
    }

    /// Matrix of R(e_a, e_b).
    pub fn r_mat(&self, a: usize, b: usize) -> Vec<S> {
        let d = self.dim();
        let mut m = vec![S::zero(); d * d];
        for k in 0..d {
            for l in 0..d {
                m[l * d + k] = self.r(a, b, k, l).clone();
            }
        }
        m
    }

    /// Matrix of ∇_u J.
    pub fn nabla_j_mat(&self, u: usize) -> Vec<S> {
        let d = self.dim();
        let mut m = vec![S::zero(); d * d];
        for k in 0..d {
            for l in 0..d {
                m[l * d + k] = self.nabla_j[(u * d + k) * d + l].clone();
            }
        }
        m
    }

    /// Converts every scalar to another mode.
    pub fn map_scalars<T: Scalar>(&self, f: impl Fn(&S) -> T) -> Result<PointJets<T>> {
        let v = |x: &[S]| x.iter().map(&f).collect::<Vec<T>>();
        let m = |x: &Mat<S>| Mat { rank: x.rank, data: v(&x.data) };
        PointJets::new(JetParts {
            n: self.n,
            rank: self.rank,
            kahler: self.kahler,
            a: v(&self.a),
            drl: v(&self.drl),
            rtx: v(&self.rtx),
            nnj: v(&self.nnj),
            re: self.re.iter().map(m).collect(),
            phi: m(&self.phi),
        })
    }

    pub fn parts(&self) -> JetParts<S> {
        JetParts {
            n: self.n,
            rank: self.rank,
            kahler: self.kahler,
            a: self.a.clone(),
            drl: self.drl.clone(),
            rtx: self.rtx.clone(),
            nnj: self.nnj.clone(),
            re: self.re.clone(),
            phi: self.phi.clone(),
        }
    }
}

pub(crate) fn matmul<S: Scalar>(x: &[S], y: &[S], d: usize) -> Vec<S> {
    let mut out = vec![S::zero(); d * d];
    for l in 0..d {
        for m in 0..d {
            let a = &x[l * d + m];
            if a.is_zero() {
                continue;
            }
            for k in 0..d {
                let b = &y[m * d + k];
                if !b.is_zero() {
                    out[l * d + k].add_assign(&a.mul(b));
                }
            }
        }
    }
    out
}

pub(crate) fn matadd<S: Scalar>(x: &[S], y: &[S]) -> Vec<S> {
    x.iter().zip(y).map(|(a, b)| a.add(b)).collect()
}

pub(crate) fn matsub<S: Scalar>(x: &[S], y: &[S]) -> Vec<S> {
    x.iter().zip(y).map(|(a, b)| a.sub(b)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{int, PiRat, Rat};

    #[test]
    fn flat_jets_are_valid() {
        let j = PointJets::flat(vec![int::<Rat>(1), int(3)], 1, false, int(0)).unwrap();
        assert!(j.validate().is_empty());
        let q = j.derived_quantities();
        assert!(q.scalar_curvature.is_zero() && q.nabla_j_sq.is_zero() && q.rho.is_zero());
    }

    #[test]
    fn bianchi_violation_is_reported() {
        let mut p = PointJets::flat(vec![int::<Rat>(1), int(1)], 1, false, int(0)).unwrap().parts();
        let (i, j, k, l) = (0, 1, 2, 3);
        p.rtx[((i * 4 + j) * 4 + k) * 4 + l] = int(1);
        let j = PointJets::new(p).unwrap();
        assert!(j.validate().contains(&"Bianchi".to_string()));
    }

    #[test]
    fn complex_structure_of_kahler_model() {
        let tp = PiRat::pi().unwrap().scale(&int(2));
        let j = PointJets::flat(vec![tp], 1, true, PiRat::zero()).unwrap();
        let jc = j.j_complex_structure();
        // J e₁ = e₂
        assert_eq!(jc[2], int(1));
        assert_eq!(jc[1], int(-1));
        assert!(j.validate().is_empty());
    }
}
