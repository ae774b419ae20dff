//! Random jets on the constraint variety.
//!
//! dRL is sampled and projected. RTX (a combination of Kulkarni–Nomizu
//! products) and ∇∇𝒥 are then solved for jointly, exactly over ℚ, with random
//! values for the free variables.

use num_bigint::BigInt;
use num_complex::Complex;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::point::{JetParts, PointJets};
use crate::error::{Error, Result};
use crate::scalar::{Coeff, Mat, Scalar};

type Q = BigRational;

fn q(v: i64) -> Q {
    Q::from_integer(BigInt::from(v))
}

/// One linear equation Σ coeffs·x = rhs.
#[derive(Clone, Debug, Default)]
pub struct LinearEq {
    pub coeffs: Vec<(usize, Q)>,
    pub rhs: Q,
}

/// Solves a linear system exactly; free variables are drawn by `free`.
/// Returns `Error::Inconsistent` when the system has no solution.
pub fn solve_with_free(eqs: &[LinearEq], nvars: usize, mut free: impl FnMut() -> Q) -> Result<Vec<Q>> {
    let mut rows: Vec<Vec<Q>> = eqs
        .iter()
        .map(|e| {
            let mut r = vec![Q::zero(); nvars + 1];
            for (i, c) in &e.coeffs {
                r[*i] += c;
            }
            r[nvars] = e.rhs.clone();
            r
        })
        .filter(|r| r.iter().any(|x| !x.is_zero()))
        .collect();
    let mut pivots = Vec::new();
    let mut row = 0;
    for col in 0..nvars {
        let Some(p) = (row..rows.len()).find(|&i| !rows[i][col].is_zero()) else {
            continue;
        };
        rows.swap(row, p);
        let inv = rows[row][col].recip();
        for x in rows[row].iter_mut() {
            *x *= &inv;
        }
        let pivot_row = rows[row].clone();
        for (i, r) in rows.iter_mut().enumerate() {
            if i == row || r[col].is_zero() {
                continue;
            }
            let f = r[col].clone();
            for (x, y) in r.iter_mut().zip(&pivot_row) {
                if !y.is_zero() {
                    *x -= &f * y;
                }
            }
        }
        pivots.push(col);
        row += 1;
        if row == rows.len() {
            break;
        }
    }
    if rows[row..].iter().any(|r| !r[nvars].is_zero()) {
        return Err(Error::Inconsistent("linear constraints for random jets".into()));
    }
    let mut x = vec![Q::zero(); nvars];
    let mut is_pivot = vec![false; nvars];
    for &c in &pivots {
        is_pivot[c] = true;
    }
    for (c, v) in x.iter_mut().enumerate() {
        if !is_pivot[c] {
            *v = free();
        }
    }
    for (r, &c) in pivots.iter().enumerate() {
        let mut v = rows[r][nvars].clone();
        for (k, coef) in rows[r].iter().enumerate().take(nvars) {
            if k != c && !coef.is_zero() {
                v -= coef * &x[k];
            }
        }
        x[c] = v;
    }
    Ok(x)
}

/// Kulkarni–Nomizu product of symmetric matrices, (h⊙k)(x,y,z,w).
fn kulkarni_nomizu(h: &[Q], k: &[Q], d: usize) -> Vec<Q> {
    let at = |m: &[Q], a: usize, b: usize| m[a * d + b].clone();
    let mut out = vec![Q::zero(); d * d * d * d];
    for x in 0..d {
        for y in 0..d {
            for z in 0..d {
                for w in 0..d {
                    out[((x * d + y) * d + z) * d + w] = at(h, x, w) * at(k, y, z) + at(h, y, z) * at(k, x, w)
                        - at(h, x, z) * at(k, y, w)
                        - at(h, y, w) * at(k, x, z);
                }
            }
        }
    }
    out
}

fn sym_basis(d: usize) -> Vec<Vec<Q>> {
    let mut out = Vec::new();
    for a in 0..d {
        for b in a..d {
            let mut m = vec![Q::zero(); d * d];
            m[a * d + b] = Q::one();
            m[b * d + a] = Q::one();
            out.push(m);
        }
    }
    out
}

struct Sampler(ChaCha8Rng);

impl Sampler {
    fn int(&mut self, lo: i64, hi: i64) -> Q {
        q(self.0.gen_range(lo..=hi))
    }
    fn cint(&mut self) -> Complex<Q> {
        Complex::new(self.int(-2, 2), self.int(-2, 2))
    }
}

/// Random jets satisfying every invariant checked by `validate`.
///
/// Kähler mode needs a scalar type that represents π.
pub fn random_jets<S: Scalar>(n: usize, rank: usize, seed: u64, kahler: bool) -> Result<PointJets<S>> {
    if n == 0 || rank == 0 {
        return Err(Error::InvalidModel("n and rank must be positive".into()));
    }
    let d = 2 * n;
    let mut rng = Sampler(ChaCha8Rng::seed_from_u64(seed));
    let i3 = |a: usize, b: usize, c: usize| (a * d + b) * d + c;
    let i4 = |a: usize, b: usize, c: usize, e: usize| ((a * d + b) * d + c) * d + e;

    // 𝒥 = c·𝒥r with 𝒥r real
    let (a, a_s, c): (Vec<Q>, Vec<S>, S) = if kahler {
        let two_pi = S::pi()?.scale(&S::from_i64(2));
        (vec![q(1); n], vec![two_pi.clone(); n], two_pi.mul(&S::imag_unit()).neg())
    } else {
        const CHOICES: [(i64, i64); 6] = [(1, 1), (2, 1), (3, 1), (1, 2), (3, 2), (5, 2)];
        let a: Vec<Q> = (0..n)
            .map(|_| {
                let (p, r) = CHOICES[rng.0.gen_range(0..CHOICES.len())];
                Q::new(BigInt::from(p), BigInt::from(r))
            })
            .collect();
        let a_s = a.iter().map(S::from_rational).collect();
        (a, a_s, S::imag_unit())
    };
    let mut jr = vec![Q::zero(); d * d];
    for j in 0..n {
        jr[(2 * j + 1) * d + 2 * j] = -a[j].clone();
        jr[2 * j * d + 2 * j + 1] = a[j].clone();
    }
    // complex structure J (equal to 𝒥r in Kähler mode)
    let mut jc = vec![Q::zero(); d * d];
    for j in 0..n {
        jc[(2 * j + 1) * d + 2 * j] = q(1);
        jc[2 * j * d + 2 * j + 1] = q(-1);
    }
    if kahler {
        jr = jc.clone();
    }

    // dRL / c: antisymmetric in (k,l), then type projection (Kähler), then cyclic-free
    let raw: Vec<Q> = (0..d * d * d).map(|_| rng.int(-2, 2)).collect();
    let mut t = vec![Q::zero(); d * d * d];
    for u in 0..d {
        for k in 0..d {
            for l in 0..d {
                t[i3(u, k, l)] = &raw[i3(u, k, l)] - &raw[i3(u, l, k)];
            }
        }
    }
    if kahler {
        t = type_project(&t, &jc, d);
    }
    let mut drlr = vec![Q::zero(); d * d * d];
    let third = Q::new(BigInt::from(1), BigInt::from(3));
    for u in 0..d {
        for v in 0..d {
            for w in 0..d {
                let cyc = &t[i3(u, v, w)] + &t[i3(v, w, u)] + &t[i3(w, u, v)];
                drlr[i3(u, v, w)] = &t[i3(u, v, w)] - &third * cyc;
            }
        }
    }

    // unknowns: κ_p for KN products, then NNr[y][u][k][l] for k < l
    let basis = sym_basis(d);
    let mut kn = Vec::new();
    for p in 0..basis.len() {
        for r in p..basis.len() {
            kn.push(kulkarni_nomizu(&basis[p], &basis[r], d));
        }
    }
    let nk = kn.len();
    let pairs: Vec<(usize, usize)> = (0..d).flat_map(|k| (k + 1..d).map(move |l| (k, l))).collect();
    let pair_index = |k: usize, l: usize| pairs.iter().position(|&p| p == (k, l)).expect("k < l");
    let nn_var = |y: usize, u: usize, k: usize, l: usize| -> Option<(usize, Q)> {
        if k == l {
            None
        } else if k < l {
            Some((nk + (y * d + u) * pairs.len() + pair_index(k, l), q(1)))
        } else {
            Some((nk + (y * d + u) * pairs.len() + pair_index(l, k), q(-1)))
        }
    };
    let nvars = nk + d * d * pairs.len();

    let mut eqs = Vec::new();
    // Ricci identity: NN(a,b) − NN(b,a) = R(a,b)𝒥r − 𝒥r R(a,b)
    for a_ in 0..d {
        for b in a_ + 1..d {
            for &(k, l) in &pairs {
                let mut e = LinearEq::default();
                e.coeffs.extend(nn_var(a_, b, k, l));
                if let Some((i, c)) = nn_var(b, a_, k, l) {
                    e.coeffs.push((i, -c));
                }
                for (p, kp) in kn.iter().enumerate() {
                    let mut s = Q::zero();
                    for m in 0..d {
                        s += &jr[m * d + k] * &kp[i4(a_, b, m, l)];
                        s -= &jr[l * d + m] * &kp[i4(a_, b, k, m)];
                    }
                    if !s.is_zero() {
                        e.coeffs.push((p, -s));
                    }
                }
                eqs.push(e);
            }
        }
    }
    // closedness of the derivative: cyclic sum over the last three slots
    for y in 0..d {
        for u in 0..d {
            for v in u + 1..d {
                for w in v + 1..d {
                    let mut e = LinearEq::default();
                    e.coeffs.extend(nn_var(y, u, v, w));
                    e.coeffs.extend(nn_var(y, v, w, u));
                    e.coeffs.extend(nn_var(y, w, u, v));
                    eqs.push(e);
                }
            }
        }
    }
    // Kähler: second derivative of J² = −1
    if kahler {
        let dj = |u: usize, row: usize, col: usize| drlr[i3(u, col, row)].clone();
        for u in 0..d {
            for v in 0..d {
                for row in 0..d {
                    for col in row..d {
                        let mut e = LinearEq::default();
                        // (N J + J N)[row][col], N[row][m] = NNr[u][v][m][row]
                        for m in 0..d {
                            let jmc = &jc[m * d + col];
                            if !jmc.is_zero() {
                                if let Some((i, s)) = nn_var(u, v, m, row) {
                                    e.coeffs.push((i, s * jmc));
                                }
                            }
                            let jrm = &jc[row * d + m];
                            if !jrm.is_zero() {
                                if let Some((i, s)) = nn_var(u, v, col, m) {
                                    e.coeffs.push((i, s * jrm));
                                }
                            }
                        }
                        let mut cst = Q::zero();
                        for m in 0..d {
                            cst += dj(u, row, m) * dj(v, m, col) + dj(v, row, m) * dj(u, m, col);
                        }
                        e.rhs = -cst;
                        eqs.push(e);
                    }
                }
            }
        }
    }

    let x = solve_with_free(&eqs, nvars, || rng.int(-2, 2))?;

    let mut rtx = vec![Q::zero(); d * d * d * d];
    for (p, kp) in kn.iter().enumerate() {
        if x[p].is_zero() {
            continue;
        }
        for (r, v) in rtx.iter_mut().zip(kp) {
            if !v.is_zero() {
                *r += &x[p] * v;
            }
        }
    }
    let mut nnr = vec![Q::zero(); d * d * d * d];
    for y in 0..d {
        for u in 0..d {
            for k in 0..d {
                for l in 0..d {
                    if let Some((i, s)) = nn_var(y, u, k, l) {
                        nnr[i4(y, u, k, l)] = s * &x[i];
                    }
                }
            }
        }
    }

    let mut re = vec![Mat::zeros(rank); d * d];
    for i in 0..d {
        for j in i + 1..d {
            let m = random_hermitian(&mut rng, rank);
            // i·(Hermitian) is anti-Hermitian
            let ah = m.scale(&S::imag_unit());
            re[j * d + i] = ah.scale(&S::from_i64(-1));
            re[i * d + j] = ah;
        }
    }
    let phi = random_hermitian(&mut rng, rank);

    let conv = |v: &[Q]| v.iter().map(|x| c.mul(&S::from_rational(x))).collect::<Vec<S>>();
    PointJets::new(JetParts {
        n,
        rank,
        kahler,
        a: a_s,
        drl: conv(&drlr),
        rtx: rtx.iter().map(S::from_rational).collect(),
        nnj: conv(&nnr),
        re,
        phi,
    })
}

fn random_hermitian<S: Scalar>(rng: &mut Sampler, rank: usize) -> Mat<S> {
    let mut m = Mat::zeros(rank);
    for i in 0..rank {
        m.set(i, i, S::from_rational(&rng.int(-2, 2)));
        for j in i + 1..rank {
            let z = rng.cint();
            let zc = Complex::new(z.re.clone(), -z.im.clone());
            m.set(i, j, S::from_crat(&z));
            m.set(j, i, S::from_crat(&zc));
        }
    }
    m
}

/// ¼[T − T(J,J,·) − T(J,·,J) − T(·,J,J)], with (Jv)_m = Σ J_{m,x} v_x.
fn type_project(t: &[Q], jc: &[Q], d: usize) -> Vec<Q> {
    let i3 = |a: usize, b: usize, c: usize| (a * d + b) * d + c;
    // T with J inserted in the chosen slots
    let act = |t: &[Q], slot: usize| -> Vec<Q> {
        let mut out = vec![Q::zero(); d * d * d];
        for a in 0..d {
            for b in 0..d {
                for c in 0..d {
                    let idx = [a, b, c];
                    let mut s = Q::zero();
                    for m in 0..d {
                        let jv = &jc[m * d + idx[slot]];
                        if jv.is_zero() {
                            continue;
                        }
                        let mut k = idx;
                        k[slot] = m;
                        s += jv * &t[i3(k[0], k[1], k[2])];
                    }
                    out[i3(a, b, c)] = s;
                }
            }
        }
        out
    };
    let t01 = act(&act(t, 0), 1);
    let t02 = act(&act(t, 0), 2);
    let t12 = act(&act(t, 1), 2);
    let quarter = Q::new(BigInt::from(1), BigInt::from(4));
    (0..t.len()).map(|i| &quarter * (&t[i] - &t01[i] - &t02[i] - &t12[i])).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{Coeff, PiRat, Rat, C64};

    #[test]
    fn deterministic_in_seed() {
        let a: PointJets<Rat> = random_jets(2, 1, 7, false).unwrap();
        let b: PointJets<Rat> = random_jets(2, 1, 7, false).unwrap();
        let c: PointJets<Rat> = random_jets(2, 1, 8, false).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn random_jets_validate() {
        for seed in 0..4 {
            for n in 1..=2 {
                let j: PointJets<Rat> = random_jets(n, 1, seed, false).unwrap();
                assert_eq!(j.validate(), Vec::<String>::new(), "n={n} seed={seed}");
            }
        }
    }

    #[test]
    fn kahler_jets_validate() {
        for seed in 0..4 {
            for n in 1..=2 {
                let j: PointJets<PiRat> = random_jets(n, 2, seed, true).unwrap();
                assert_eq!(j.validate(), Vec::<String>::new(), "n={n} seed={seed}");
                let two_pi = PiRat::pi().unwrap().scale(&PiRat::from_i64(2));
                assert!(j.a.iter().all(|x| *x == two_pi));
            }
        }
    }

    #[test]
    fn kahler_needs_pi() {
        assert!(matches!(random_jets::<Rat>(1, 1, 0, true), Err(Error::PiUnavailable)));
        assert!(random_jets::<C64>(1, 1, 0, true).is_ok());
    }

    #[test]
    fn one_dimensional_kahler_has_parallel_j() {
        let j: PointJets<PiRat> = random_jets(1, 1, 3, true).unwrap();
        assert!(j.nabla_j.iter().all(|x| x.is_zero()));
    }

    #[test]
    fn inconsistent_system_is_reported() {
        let eqs = vec![
            LinearEq { coeffs: vec![(0, q(1))], rhs: q(1) },
            LinearEq { coeffs: vec![(0, q(2))], rhs: q(3) },
        ];
        assert!(matches!(solve_with_free(&eqs, 1, || q(0)), Err(Error::Inconsistent(_))));
    }

    #[test]
    fn solver_respects_equations() {
        let eqs = vec![LinearEq { coeffs: vec![(0, q(1)), (1, q(2)), (2, q(-1))], rhs: q(5) }];
        let x = solve_with_free(&eqs, 3, || q(3)).unwrap();
        assert_eq!(&x[0] + q(2) * &x[1] - &x[2], q(5));
    }

    #[test]
    fn kahler_scalar_curvature_identity() {
        for seed in 0..6 {
            let j: PointJets<PiRat> = random_jets(2, 1, seed, true).unwrap();
            let lhs = j.derived_quantities().scalar_curvature;
            assert_eq!(lhs, j.scalar_curvature_complex().unwrap(), "seed={seed}");
        }
    }
}
