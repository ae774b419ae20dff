//! Scalar and coefficient rings.
//!
//! Three scalar modes are provided: [`Rat`] (exact complex rationals), [`PiRat`]
//! (Laurent polynomials in a formal symbol standing for pi, with complex rational
//! coefficients) and [`C64`] (complex doubles with a relative tolerance). Bundle
//! rank r > 1 is handled by [`Mat`], an r x r matrix over a scalar.

use crate::error::{Error, Result};
use num_bigint::BigInt;
use num_complex::{Complex, Complex64};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use std::collections::BTreeMap;
use std::fmt;

/// Relative tolerance used by float-mode comparisons.
pub const FLOAT_TOL: f64 = 1e-10;
/// Float-mode coefficients below this fraction of the largest one are dropped.
pub const FLOAT_PRUNE: f64 = 1e-14;

pub type CRat = Complex<BigRational>;

/// A ring element usable as a coefficient of kernels and operators.
pub trait Coeff: Clone + fmt::Debug + PartialEq + Send + Sync + 'static {
    type S: Scalar;
    fn is_zero(&self) -> bool;
    fn add(&self, o: &Self) -> Self;
    fn neg(&self) -> Self;
    fn mul(&self, o: &Self) -> Self;
    fn scale(&self, s: &Self::S) -> Self;
    fn adjoint(&self) -> Self;
    fn zero_like(&self) -> Self;
    /// `s` times the identity, with the rank of `self`.
    fn scalar_like(&self, s: Self::S) -> Self;
    fn magnitude(&self) -> f64;
    fn approx_eq(&self, o: &Self, scale: f64) -> bool;

    fn sub(&self, o: &Self) -> Self {
        self.add(&o.neg())
    }
    fn add_assign(&mut self, o: &Self) {
        *self = self.add(o);
    }
}

pub trait Scalar: Coeff<S = Self> + fmt::Display {
    const EXACT: bool;
    fn zero() -> Self;
    fn one() -> Self;
    fn from_i64(v: i64) -> Self;
    fn from_ratio(n: i64, d: i64) -> Self {
        Self::from_rational(&BigRational::new(BigInt::from(n), BigInt::from(d)))
    }
    fn from_rational(r: &BigRational) -> Self;
    fn from_crat(c: &CRat) -> Self;
    fn imag_unit() -> Self;
    /// The transcendental pi, when the mode can represent it.
    fn pi() -> Result<Self>;
    fn conj(&self) -> Self;
    fn inv(&self) -> Result<Self>;
    fn to_c64(&self) -> Complex64;

    fn div(&self, o: &Self) -> Result<Self> {
        Ok(self.mul(&o.inv()?))
    }
    fn pow(&self, k: u32) -> Self {
        let mut acc = Self::one();
        for _ in 0..k {
            acc = acc.mul(self);
        }
        acc
    }
    /// Exactly real and strictly positive when evaluated (pi > 0).
    fn is_positive(&self) -> bool {
        let c = self.to_c64();
        c.im == 0.0 && c.re > 0.0
    }
}

fn crat_is_zero(c: &CRat) -> bool {
    c.re.is_zero() && c.im.is_zero()
}

fn crat_inv(c: &CRat) -> Result<CRat> {
    if crat_is_zero(c) {
        return Err(Error::DivisionByZero);
    }
    let n = &c.re * &c.re + &c.im * &c.im;
    Ok(Complex::new(&c.re / &n, -&c.im / &n))
}

fn crat_to_c64(c: &CRat) -> Complex64 {
    Complex64::new(c.re.to_f64().unwrap_or(f64::NAN), c.im.to_f64().unwrap_or(f64::NAN))
}

pub fn crat(re: i64, im: i64) -> CRat {
    Complex::new(BigRational::from_integer(re.into()), BigRational::from_integer(im.into()))
}

fn fmt_rat(r: &BigRational) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

fn fmt_crat(c: &CRat) -> String {
    match (c.re.is_zero(), c.im.is_zero()) {
        (_, true) => fmt_rat(&c.re),
        (true, false) => format!("{}i", fmt_rat(&c.im)),
        _ => {
            let sign = if c.im.is_negative() { "-" } else { "+" };
            format!("({}{}{}i)", fmt_rat(&c.re), sign, fmt_rat(&c.im.abs()))
        }
    }
}

// ---------------------------------------------------------------- Rat

/// Exact complex rational.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Rat(pub CRat);

impl Rat {
    pub fn new(re: BigRational, im: BigRational) -> Self {
        Rat(Complex::new(re, im))
    }
}

impl fmt::Display for Rat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&fmt_crat(&self.0))
    }
}

impl Coeff for Rat {
    type S = Rat;
    fn is_zero(&self) -> bool {
        crat_is_zero(&self.0)
    }
    fn add(&self, o: &Self) -> Self {
        Rat(&self.0 + &o.0)
    }
    fn neg(&self) -> Self {
        Rat(-self.0.clone())
    }
    fn mul(&self, o: &Self) -> Self {
        Rat(&self.0 * &o.0)
    }
    fn scale(&self, s: &Rat) -> Self {
        self.mul(s)
    }
    fn adjoint(&self) -> Self {
        self.conj()
    }
    fn zero_like(&self) -> Self {
        Rat::zero()
    }
    fn scalar_like(&self, s: Rat) -> Self {
        s
    }
    fn magnitude(&self) -> f64 {
        self.to_c64().norm()
    }
    fn approx_eq(&self, o: &Self, _scale: f64) -> bool {
        self == o
    }
    fn add_assign(&mut self, o: &Self) {
        self.0.re += &o.0.re;
        self.0.im += &o.0.im;
    }
}

impl Scalar for Rat {
    const EXACT: bool = true;
    fn zero() -> Self {
        Rat(Complex::new(BigRational::zero(), BigRational::zero()))
    }
    fn one() -> Self {
        Rat(Complex::new(BigRational::one(), BigRational::zero()))
    }
    fn from_i64(v: i64) -> Self {
        Rat(crat(v, 0))
    }
    fn from_rational(r: &BigRational) -> Self {
        Rat(Complex::new(r.clone(), BigRational::zero()))
    }
    fn from_crat(c: &CRat) -> Self {
        Rat(c.clone())
    }
    fn imag_unit() -> Self {
        Rat(crat(0, 1))
    }
    fn pi() -> Result<Self> {
        Err(Error::PiUnavailable)
    }
    fn conj(&self) -> Self {
        Rat(self.0.conj())
    }
    fn inv(&self) -> Result<Self> {
        crat_inv(&self.0).map(Rat)
    }
    fn to_c64(&self) -> Complex64 {
        crat_to_c64(&self.0)
    }
}

// ---------------------------------------------------------------- PiRat

/// Laurent polynomial in the formal symbol Π (evaluated as pi) with exact
/// complex rational coefficients. Division is only by monomials c·Π^k.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct PiRat {
    terms: BTreeMap<i32, CRat>,
}

impl PiRat {
    pub fn monomial(c: CRat, k: i32) -> Self {
        let mut terms = BTreeMap::new();
        if !crat_is_zero(&c) {
            terms.insert(k, c);
        }
        PiRat { terms }
    }
    pub fn terms(&self) -> impl Iterator<Item = (i32, &CRat)> {
        self.terms.iter().map(|(k, c)| (*k, c))
    }
    /// The Π-grades present.
    pub fn grades(&self) -> Vec<i32> {
        self.terms.keys().copied().collect()
    }
    /// Coefficient of Π^k.
    pub fn coeff(&self, k: i32) -> CRat {
        self.terms.get(&k).cloned().unwrap_or_else(|| crat(0, 0))
    }
}

impl fmt::Display for PiRat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        let parts: Vec<String> = self
            .terms
            .iter()
            .map(|(k, c)| match k {
                0 => fmt_crat(c),
                1 => format!("{}*pi", fmt_crat(c)),
                _ => format!("{}*pi^{}", fmt_crat(c), k),
            })
            .collect();
        f.write_str(&parts.join(" + "))
    }
}

impl Coeff for PiRat {
    type S = PiRat;
    fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }
    fn add(&self, o: &Self) -> Self {
        let mut r = self.clone();
        r.add_assign(o);
        r
    }
    fn add_assign(&mut self, o: &Self) {
        for (k, c) in &o.terms {
            let e = self.terms.entry(*k).or_insert_with(|| crat(0, 0));
            e.re += &c.re;
            e.im += &c.im;
            if crat_is_zero(e) {
                self.terms.remove(k);
            }
        }
    }
    fn neg(&self) -> Self {
        PiRat { terms: self.terms.iter().map(|(k, c)| (*k, -c.clone())).collect() }
    }
    fn mul(&self, o: &Self) -> Self {
        let mut r = PiRat::default();
        for (k1, c1) in &self.terms {
            for (k2, c2) in &o.terms {
                r.add_assign(&PiRat::monomial(c1 * c2, k1 + k2));
            }
        }
        r
    }
    fn scale(&self, s: &PiRat) -> Self {
        self.mul(s)
    }
    fn adjoint(&self) -> Self {
        self.conj()
    }
    fn zero_like(&self) -> Self {
        PiRat::default()
    }
    fn scalar_like(&self, s: PiRat) -> Self {
        s
    }
    fn magnitude(&self) -> f64 {
        self.to_c64().norm()
    }
    fn approx_eq(&self, o: &Self, _scale: f64) -> bool {
        self == o
    }
}

impl Scalar for PiRat {
    const EXACT: bool = true;
    fn zero() -> Self {
        PiRat::default()
    }
    fn one() -> Self {
        PiRat::monomial(crat(1, 0), 0)
    }
    fn from_i64(v: i64) -> Self {
        PiRat::monomial(crat(v, 0), 0)
    }
    fn from_rational(r: &BigRational) -> Self {
        PiRat::monomial(Complex::new(r.clone(), BigRational::zero()), 0)
    }
    fn from_crat(c: &CRat) -> Self {
        PiRat::monomial(c.clone(), 0)
    }
    fn imag_unit() -> Self {
        PiRat::monomial(crat(0, 1), 0)
    }
    fn pi() -> Result<Self> {
        Ok(PiRat::monomial(crat(1, 0), 1))
    }
    fn conj(&self) -> Self {
        PiRat { terms: self.terms.iter().map(|(k, c)| (*k, c.conj())).collect() }
    }
    fn inv(&self) -> Result<Self> {
        match self.terms.len() {
            0 => Err(Error::DivisionByZero),
            1 => {
                let (k, c) = self.terms.iter().next().unwrap();
                Ok(PiRat::monomial(crat_inv(c)?, -k))
            }
            _ => Err(Error::NonMonomialDivision(self.to_string())),
        }
    }
    fn to_c64(&self) -> Complex64 {
        self.terms
            .iter()
            .map(|(k, c)| crat_to_c64(c) * std::f64::consts::PI.powi(*k))
            .sum()
    }
}

// ---------------------------------------------------------------- C64

/// Complex double with tolerance-based comparisons.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct C64(pub Complex64);

impl C64 {
    pub fn new(re: f64, im: f64) -> Self {
        C64(Complex64::new(re, im))
    }
}

impl fmt::Display for C64 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.im == 0.0 {
            write!(f, "{:.17e}", self.0.re)
        } else {
            write!(f, "({:.17e}{:+.17e}i)", self.0.re, self.0.im)
        }
    }
}

impl Coeff for C64 {
    type S = C64;
    fn is_zero(&self) -> bool {
        self.0.re == 0.0 && self.0.im == 0.0
    }
    fn add(&self, o: &Self) -> Self {
        C64(self.0 + o.0)
    }
    fn neg(&self) -> Self {
        C64(-self.0)
    }
    fn mul(&self, o: &Self) -> Self {
        C64(self.0 * o.0)
    }
    fn scale(&self, s: &C64) -> Self {
        self.mul(s)
    }
    fn adjoint(&self) -> Self {
        self.conj()
    }
    fn zero_like(&self) -> Self {
        C64::zero()
    }
    fn scalar_like(&self, s: C64) -> Self {
        s
    }
    fn magnitude(&self) -> f64 {
        self.0.norm()
    }
    fn approx_eq(&self, o: &Self, scale: f64) -> bool {
        let s = scale.max(self.0.norm()).max(o.0.norm());
        (self.0 - o.0).norm() <= FLOAT_TOL * s
    }
}

impl Scalar for C64 {
    const EXACT: bool = false;
    fn zero() -> Self {
        C64::new(0.0, 0.0)
    }
    fn one() -> Self {
        C64::new(1.0, 0.0)
    }
    fn from_i64(v: i64) -> Self {
        C64::new(v as f64, 0.0)
    }
    fn from_rational(r: &BigRational) -> Self {
        C64::new(r.to_f64().unwrap_or(f64::NAN), 0.0)
    }
    fn from_crat(c: &CRat) -> Self {
        C64(crat_to_c64(c))
    }
    fn imag_unit() -> Self {
        C64::new(0.0, 1.0)
    }
    fn pi() -> Result<Self> {
        Ok(C64::new(std::f64::consts::PI, 0.0))
    }
    fn conj(&self) -> Self {
        C64(self.0.conj())
    }
    fn inv(&self) -> Result<Self> {
        if self.is_zero() {
            Err(Error::DivisionByZero)
        } else {
            Ok(C64(self.0.inv()))
        }
    }
    fn to_c64(&self) -> Complex64 {
        self.0
    }
}

// ---------------------------------------------------------------- Mat

/// Square matrix coefficient for bundles of rank r > 1 (row-major).
#[derive(Clone, Debug, PartialEq)]
pub struct Mat<S: Scalar> {
    pub rank: usize,
    pub data: Vec<S>,
}

impl<S: Scalar> Mat<S> {
    pub fn zeros(rank: usize) -> Self {
        Mat { rank, data: vec![S::zero(); rank * rank] }
    }
    pub fn identity(rank: usize) -> Self {
        Self::scalar(rank, S::one())
    }
    pub fn scalar(rank: usize, s: S) -> Self {
        let mut m = Self::zeros(rank);
        for i in 0..rank {
            m.data[i * rank + i] = s.clone();
        }
        m
    }
    pub fn from_rows(rows: Vec<Vec<S>>) -> Self {
        let rank = rows.len();
        Mat { rank, data: rows.into_iter().flatten().collect() }
    }
    pub fn get(&self, i: usize, j: usize) -> &S {
        &self.data[i * self.rank + j]
    }
    pub fn set(&mut self, i: usize, j: usize, v: S) {
        self.data[i * self.rank + j] = v;
    }
    pub fn trace(&self) -> S {
        let mut t = S::zero();
        for i in 0..self.rank {
            t.add_assign(self.get(i, i));
        }
        t
    }
    pub fn is_hermitian(&self) -> bool {
        (0..self.rank).all(|i| {
            (0..self.rank).all(|j| self.get(i, j).approx_eq(&self.get(j, i).conj(), 1.0))
        })
    }
    pub fn is_anti_hermitian(&self) -> bool {
        (0..self.rank).all(|i| {
            (0..self.rank).all(|j| self.get(i, j).approx_eq(&self.get(j, i).conj().neg(), 1.0))
        })
    }
    fn check(&self, o: &Self) {
        assert_eq!(self.rank, o.rank, "matrix coefficient rank mismatch");
    }
}

impl<S: Scalar> Coeff for Mat<S> {
    type S = S;
    fn is_zero(&self) -> bool {
        self.data.iter().all(|x| x.is_zero())
    }
    fn add(&self, o: &Self) -> Self {
        self.check(o);
        Mat { rank: self.rank, data: self.data.iter().zip(&o.data).map(|(a, b)| a.add(b)).collect() }
    }
    fn neg(&self) -> Self {
        Mat { rank: self.rank, data: self.data.iter().map(|a| a.neg()).collect() }
    }
    fn mul(&self, o: &Self) -> Self {
        self.check(o);
        let r = self.rank;
        let mut out = Self::zeros(r);
        for i in 0..r {
            for k in 0..r {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..r {
                    let b = o.get(k, j);
                    if !b.is_zero() {
                        out.data[i * r + j].add_assign(&a.mul(b));
                    }
                }
            }
        }
        out
    }
    fn scale(&self, s: &S) -> Self {
        Mat { rank: self.rank, data: self.data.iter().map(|a| a.mul(s)).collect() }
    }
    fn adjoint(&self) -> Self {
        let r = self.rank;
        let mut out = Self::zeros(r);
        for i in 0..r {
            for j in 0..r {
                out.data[j * r + i] = self.get(i, j).conj();
            }
        }
        out
    }
    fn zero_like(&self) -> Self {
        Self::zeros(self.rank)
    }
    fn scalar_like(&self, s: S) -> Self {
        Self::scalar(self.rank, s)
    }
    fn magnitude(&self) -> f64 {
        self.data.iter().map(|x| x.magnitude()).fold(0.0, f64::max)
    }
    fn approx_eq(&self, o: &Self, scale: f64) -> bool {
        self.rank == o.rank && self.data.iter().zip(&o.data).all(|(a, b)| a.approx_eq(b, scale))
    }
}

/// Shorthand for an integer scalar.
pub fn int<S: Scalar>(v: i64) -> S {
    S::from_i64(v)
}

/// Shorthand for a rational scalar n/d.
pub fn frac<S: Scalar>(n: i64, d: i64) -> S {
    S::from_ratio(n, d)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pirat_division_only_by_monomials() {
        let two_pi = PiRat::pi().unwrap().scale(&PiRat::from_i64(2));
        let inv = two_pi.inv().unwrap();
        assert_eq!(inv.mul(&two_pi), PiRat::one());
        let binomial = two_pi.add(&PiRat::one());
        assert!(matches!(binomial.inv(), Err(Error::NonMonomialDivision(_))));
        assert!(matches!(PiRat::zero().inv(), Err(Error::DivisionByZero)));
    }

    #[test]
    fn pirat_evaluates_pi() {
        let x = PiRat::pi().unwrap().pow(2).add(&PiRat::from_ratio(1, 2));
        let v = x.to_c64();
        assert!((v.re - (std::f64::consts::PI.powi(2) + 0.5)).abs() < 1e-12);
    }

    #[test]
    fn rat_has_no_pi() {
        assert!(matches!(Rat::pi(), Err(Error::PiUnavailable)));
        let z = Rat::from_crat(&crat(3, 4));
        assert_eq!(z.mul(&z.inv().unwrap()), Rat::one());
        assert_eq!(z.conj().0, crat(3, -4));
    }

    #[test]
    fn float_tolerance_is_relative() {
        let a = C64::new(1e6, 0.0);
        let b = C64::new(1e6 * (1.0 + 1e-12), 0.0);
        assert!(a.approx_eq(&b, 0.0));
        assert!(!a.approx_eq(&C64::new(1e6 * (1.0 + 1e-8), 0.0), 0.0));
    }

    #[test]
    fn matrices_do_not_commute() {
        let a = Mat::from_rows(vec![vec![int::<Rat>(0), int(1)], vec![int(0), int(0)]]);
        let b = Mat::from_rows(vec![vec![int::<Rat>(0), int(0)], vec![int(1), int(0)]]);
        assert_ne!(a.mul(&b), b.mul(&a));
        assert_eq!(a.adjoint(), b);
    }
}
