use crate::error::{Error, Result};
use crate::poly::Exps;
use crate::scalar::Scalar;
use std::collections::HashMap;
use std::sync::{Arc, Mutex};

/// Normal form of `z^α z̄^β P^N` as a list of `(key, coefficient)` with key
/// `[ν (b-power), μ (z-power), κ (z̄'-power)]`.
pub(crate) type NormalForm<S> = Arc<Vec<(Exps, S)>>;

/// The model operator ℒ₀ = Σ bᵢbᵢ⁺ at a point, fixed by the eigenvalues `a`.
///
/// Holds memo tables for the normal-form rewriting; they are internally
/// synchronized and never change observable results.
pub struct ModelSpec<S: Scalar> {
    n: usize,
    a: Vec<S>,
    a_inv: Vec<S>,
    pub(crate) nf_cache: Mutex<HashMap<(Exps, Exps), NormalForm<S>>>,
    pub(crate) mid_cache: Mutex<HashMap<Exps, NormalForm<S>>>,
}

impl<S: Scalar> Clone for ModelSpec<S> {
    fn clone(&self) -> Self {
        ModelSpec::new(self.a.clone()).expect("already validated")
    }
}

impl<S: Scalar> std::fmt::Debug for ModelSpec<S> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ModelSpec").field("n", &self.n).field("a", &self.a).finish()
    }
}

impl<S: Scalar> PartialEq for ModelSpec<S> {
    fn eq(&self, o: &Self) -> bool {
        self.a == o.a
    }
}

impl<S: Scalar> ModelSpec<S> {
    pub fn new(a: Vec<S>) -> Result<Self> {
        if a.is_empty() {
            return Err(Error::InvalidModel("n must be at least 1".into()));
        }
        let mut a_inv = Vec::with_capacity(a.len());
        for (i, ai) in a.iter().enumerate() {
            if !ai.is_positive() {
                return Err(Error::InvalidModel(format!("a[{i}] = {ai} is not positive")));
            }
            a_inv.push(ai.inv()?);
        }
        Ok(ModelSpec {
            n: a.len(),
            a,
            a_inv,
            nf_cache: Mutex::new(HashMap::new()),
            mid_cache: Mutex::new(HashMap::new()),
        })
    }

    /// All aᵢ = 2π (the Kähler normalization).
    pub fn kahler(n: usize) -> Result<Self> {
        let two_pi = S::pi()?.scale(&S::from_i64(2));
        Self::new(vec![two_pi; n])
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn a(&self) -> &[S] {
        &self.a
    }

    pub fn a_inv(&self) -> &[S] {
        &self.a_inv
    }

    /// τ₀ = Σ aᵢ.
    pub fn tau0(&self) -> S {
        self.a.iter().fold(S::zero(), |acc, x| acc.add(x))
    }

    /// Spectral gap 2·min aᵢ, as a float.
    pub fn gap(&self) -> f64 {
        2.0 * self.a.iter().map(|x| x.to_c64().re).fold(f64::INFINITY, f64::min)
    }

    /// Eigenvalue 2β·a of the ℒ₀-eigenspace labelled by β.
    pub fn eigenvalue(&self, beta: &[u8]) -> S {
        let mut s = S::zero();
        for (b, a) in beta.iter().zip(&self.a) {
            if *b > 0 {
                s.add_assign(&a.scale(&S::from_i64(2 * *b as i64)));
            }
        }
        s
    }

    pub fn check_index(&self, i: usize) -> Result<()> {
        if i < self.n {
            Ok(())
        } else {
            Err(Error::IndexOutOfRange { index: i, n: self.n })
        }
    }

    /// P^N(0,0) = (2π)^{-n} Π aᵢ.
    pub fn pn_origin(&self) -> Result<S> {
        let two_pi = S::pi()?.scale(&S::from_i64(2));
        let mut v = two_pi.pow(self.n as u32).inv()?;
        for a in &self.a {
            v = v.mul(a);
        }
        Ok(v)
    }
}

/// One distinct eigenvalue of ℒ₀ below a cutoff.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectrumLevel<S> {
    pub eigenvalue: S,
    /// The multi-indices α with 2α·a equal to the eigenvalue.
    pub alphas: Vec<Vec<u8>>,
}

/// Distinct values 2Σαᵢaᵢ not exceeding `cutoff`, ascending.
pub fn model_spectrum<S: Scalar>(m: &ModelSpec<S>, cutoff: &S) -> Vec<SpectrumLevel<S>> {
    let cut = cutoff.to_c64().re;
    let amin = m.a.iter().map(|x| x.to_c64().re).fold(f64::INFINITY, f64::min);
    let max_k = (cut / (2.0 * amin)).floor().max(0.0) as usize;
    let mut out: Vec<SpectrumLevel<S>> = Vec::new();
    let mut alpha = vec![0u8; m.n];
    loop {
        let ev = m.eigenvalue(&alpha);
        let v = ev.to_c64().re;
        if v <= cut * (1.0 + 1e-12) + 1e-300 {
            match out.iter_mut().find(|l| l.eigenvalue.approx_eq(&ev, 1.0)) {
                Some(l) => l.alphas.push(alpha.clone()),
                None => out.push(SpectrumLevel { eigenvalue: ev, alphas: vec![alpha.clone()] }),
            }
        }
        // odometer over the box 0..=max_k
        let mut i = 0;
        loop {
            if i == m.n {
                out.sort_by(|x, y| x.eigenvalue.to_c64().re.total_cmp(&y.eigenvalue.to_c64().re));
                return out;
            }
            if (alpha[i] as usize) < max_k {
                alpha[i] += 1;
                break;
            }
            alpha[i] = 0;
            i += 1;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{int, Coeff, PiRat, Rat};

    #[test]
    fn spectrum_n1_kahler() {
        let m = ModelSpec::<PiRat>::kahler(1).unwrap();
        let cut = PiRat::pi().unwrap().scale(&int(10));
        let s = model_spectrum(&m, &cut);
        let pi = PiRat::pi().unwrap();
        let vals: Vec<PiRat> = s.iter().map(|l| l.eigenvalue.clone()).collect();
        assert_eq!(vals, vec![PiRat::zero(), pi.scale(&int(4)), pi.scale(&int(8))]);
    }

    #[test]
    fn spectrum_zero_cutoff() {
        let m = ModelSpec::<PiRat>::kahler(2).unwrap();
        let s = model_spectrum(&m, &PiRat::zero());
        assert_eq!(s.len(), 1);
        assert!(s[0].eigenvalue.is_zero());
    }

    #[test]
    fn spectrum_counts_ties() {
        let pi = PiRat::pi().unwrap();
        let m = ModelSpec::new(vec![pi.scale(&int(2)), pi.scale(&int(4))]).unwrap();
        let s = model_spectrum(&m, &pi.scale(&int(9)));
        assert_eq!(s.len(), 3);
        assert_eq!(s[2].eigenvalue, pi.scale(&int(8)));
        let mut al = s[2].alphas.clone();
        al.sort();
        assert_eq!(al, vec![vec![0, 1], vec![2, 0]]);
    }

    #[test]
    fn rejects_nonpositive() {
        assert!(ModelSpec::new(vec![Rat::from_i64(0)]).is_err());
        assert!(ModelSpec::new(vec![Rat::from_i64(-1)]).is_err());
        assert!(ModelSpec::<Rat>::kahler(1).is_err());
    }
}
