//! JSON encoding of jets and scalars.
//!
//! Complex values are `[re, im]`; exact rationals may be written as strings
//! `"p/q"`. Π-graded values are objects `{"grade": [re, im]}`. Tensors are flat
//! row-major arrays and matrices are flat `rank × rank` arrays.

use num_bigint::BigInt;
use num_complex::Complex;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use serde_json::{json, Map, Value};
use std::str::FromStr;

use super::point::{JetParts, PointJets};
use crate::error::{Error, Result};
use crate::scalar::{CRat, Coeff, Mat, PiRat, Rat, Scalar, C64};

fn perr(msg: impl Into<String>) -> Error {
    Error::Parse(msg.into())
}

/// Scalars with a JSON form.
pub trait JsonScalar: Scalar {
    const MODE: &'static str;
    fn to_json(&self) -> Value;
    fn from_json(v: &Value) -> Result<Self>;
}

fn parse_rational(v: &Value) -> Result<BigRational> {
    match v {
        Value::String(s) => {
            let s = s.trim();
            if let Some((p, q)) = s.split_once('/') {
                let p = BigInt::from_str(p.trim()).map_err(|e| perr(format!("{s}: {e}")))?;
                let q = BigInt::from_str(q.trim()).map_err(|e| perr(format!("{s}: {e}")))?;
                if q.is_zero() {
                    return Err(perr(format!("{s}: zero denominator")));
                }
                Ok(BigRational::new(p, q))
            } else {
                Ok(BigRational::from_integer(BigInt::from_str(s).map_err(|e| perr(format!("{s}: {e}")))?))
            }
        }
        Value::Number(n) => {
            if let Some(i) = n.as_i64() {
                Ok(BigRational::from_integer(BigInt::from(i)))
            } else {
                let f = n.as_f64().ok_or_else(|| perr("bad number"))?;
                BigRational::from_float(f).ok_or_else(|| perr(format!("{f} is not finite")))
            }
        }
        _ => Err(perr(format!("expected a rational, got {v}"))),
    }
}

fn rational_json(r: &BigRational) -> Value {
    if r.is_integer() {
        match r.numer().to_i64() {
            Some(i) => json!(i),
            None => json!(r.numer().to_string()),
        }
    } else {
        json!(format!("{}/{}", r.numer(), r.denom()))
    }
}

fn parse_crat(v: &Value) -> Result<CRat> {
    match v {
        Value::Array(a) if a.len() == 2 => Ok(Complex::new(parse_rational(&a[0])?, parse_rational(&a[1])?)),
        Value::Array(_) => Err(perr("complex values are [re, im]")),
        other => Ok(Complex::new(parse_rational(other)?, BigRational::zero())),
    }
}

fn crat_json(c: &CRat) -> Value {
    json!([rational_json(&c.re), rational_json(&c.im)])
}

impl JsonScalar for Rat {
    const MODE: &'static str = "exact";
    fn to_json(&self) -> Value {
        crat_json(&self.0)
    }
    fn from_json(v: &Value) -> Result<Self> {
        if v.is_object() {
            let p = PiRat::from_json(v)?;
            if p.grades().iter().any(|&g| g != 0) {
                return Err(Error::PiUnavailable);
            }
            return Ok(Rat(p.coeff(0)));
        }
        Ok(Rat(parse_crat(v)?))
    }
}

impl JsonScalar for PiRat {
    const MODE: &'static str = "exact";
    fn to_json(&self) -> Value {
        let mut m = Map::new();
        for (k, c) in self.terms() {
            m.insert(k.to_string(), crat_json(c));
        }
        Value::Object(m)
    }
    fn from_json(v: &Value) -> Result<Self> {
        match v {
            Value::Object(m) => {
                let mut out = PiRat::zero();
                for (k, c) in m {
                    let g: i32 = k.parse().map_err(|_| perr(format!("bad grade {k}")))?;
                    out = out.add(&PiRat::monomial(parse_crat(c)?, g));
                }
                Ok(out)
            }
            other => Ok(PiRat::monomial(parse_crat(other)?, 0)),
        }
    }
}

impl JsonScalar for C64 {
    const MODE: &'static str = "float";
    fn to_json(&self) -> Value {
        json!([self.0.re, self.0.im])
    }
    fn from_json(v: &Value) -> Result<Self> {
        if v.is_object() {
            return Ok(C64(PiRat::from_json(v)?.to_c64()));
        }
        let f = |x: &Value| -> Result<f64> {
            match x {
                Value::Number(n) => n.as_f64().ok_or_else(|| perr("bad number")),
                other => parse_rational(other)?.to_f64().ok_or_else(|| perr("rational out of range")),
            }
        };
        match v {
            Value::Array(a) if a.len() == 2 => Ok(C64::new(f(&a[0])?, f(&a[1])?)),
            Value::Array(_) => Err(perr("complex values are [re, im]")),
            other => Ok(C64::new(f(other)?, 0.0)),
        }
    }
}

pub fn mat_json<S: JsonScalar>(m: &Mat<S>) -> Value {
    Value::Array(m.data.iter().map(|x| x.to_json()).collect())
}

fn vec_json<S: JsonScalar>(v: &[S]) -> Value {
    Value::Array(v.iter().map(|x| x.to_json()).collect())
}

fn field<'a>(o: &'a Map<String, Value>, k: &str) -> Result<&'a Value> {
    o.get(k).ok_or_else(|| perr(format!("missing field {k}")))
}

fn parse_vec<S: JsonScalar>(v: &Value, name: &str) -> Result<Vec<S>> {
    v.as_array()
        .ok_or_else(|| perr(format!("{name} must be an array")))?
        .iter()
        .map(S::from_json)
        .collect()
}

fn parse_mat<S: JsonScalar>(v: &Value, rank: usize, name: &str) -> Result<Mat<S>> {
    let data = parse_vec::<S>(v, name)?;
    if data.len() != rank * rank {
        return Err(Error::DimensionMismatch(format!("{name}: expected {} entries", rank * rank)));
    }
    Ok(Mat { rank, data })
}

impl<S: JsonScalar> PointJets<S> {
    pub fn to_json(&self) -> Value {
        json!({
            "n": self.n,
            "rank": self.rank,
            "kahler": self.kahler,
            "mode": S::MODE,
            "a": vec_json(&self.a),
            "dRL": vec_json(&self.drl),
            "d2RL": vec_json(&self.d2rl),
            "RTX": vec_json(&self.rtx),
            "RE": Value::Array(self.re.iter().map(mat_json).collect()),
            "dtau": vec_json(&self.dtau),
            "d2tau": vec_json(&self.d2tau),
            "Phi": mat_json(&self.phi),
            "nablaJ": vec_json(&self.nabla_j),
            "nnJ": vec_json(&self.nnj),
        })
    }

    /// Reads jets; derived fields, when present, must agree with the values
    /// derived from dRL and nnJ.
    pub fn from_json(v: &Value) -> Result<Self> {
        let o = v.as_object().ok_or_else(|| perr("jets must be a JSON object"))?;
        let n = field(o, "n")?.as_u64().ok_or_else(|| perr("n must be a positive integer"))? as usize;
        let rank = match o.get("rank") {
            Some(r) => r.as_u64().ok_or_else(|| perr("rank must be a positive integer"))? as usize,
            None => 1,
        };
        let kahler = o.get("kahler").and_then(Value::as_bool).unwrap_or(false);
        let re = field(o, "RE")?
            .as_array()
            .ok_or_else(|| perr("RE must be an array of matrices"))?
            .iter()
            .map(|m| parse_mat(m, rank, "RE"))
            .collect::<Result<Vec<_>>>()?;
        let j = PointJets::new(JetParts {
            n,
            rank,
            kahler,
            a: parse_vec(field(o, "a")?, "a")?,
            drl: parse_vec(field(o, "dRL")?, "dRL")?,
            rtx: parse_vec(field(o, "RTX")?, "RTX")?,
            nnj: parse_vec(field(o, "nnJ")?, "nnJ")?,
            re,
            phi: parse_mat(field(o, "Phi")?, rank, "Phi")?,
        })?;
        let mut bad = Vec::new();
        let overrides: [(&str, &Vec<S>); 4] =
            [("d2RL", &j.d2rl), ("dtau", &j.dtau), ("d2tau", &j.d2tau), ("nablaJ", &j.nabla_j)];
        for (name, derived) in overrides {
            if let Some(v) = o.get(name) {
                let given: Vec<S> = parse_vec(v, name)?;
                let ok = given.len() == derived.len()
                    && given.iter().zip(derived.iter()).all(|(x, y)| x.approx_eq(y, 1.0));
                if !ok {
                    bad.push(format!("{name} disagrees with the derived value"));
                }
            }
        }
        if bad.is_empty() {
            Ok(j)
        } else {
            Err(Error::InvalidJets(bad))
        }
    }
}

/// Jets in whichever scalar mode the file selects.
#[derive(Clone, Debug)]
pub enum AnyJets {
    Rational(PointJets<Rat>),
    Pi(PointJets<PiRat>),
    Float(PointJets<C64>),
}

impl AnyJets {
    /// `mode` is `exact` (Π-graded when Kähler), `rational`, `pi` or `float`.
    pub fn from_json(v: &Value) -> Result<Self> {
        let mode = v.get("mode").and_then(Value::as_str).unwrap_or("exact");
        let kahler = v.get("kahler").and_then(Value::as_bool).unwrap_or(false);
        match mode {
            "exact" if kahler => Ok(AnyJets::Pi(PointJets::from_json(v)?)),
            "exact" | "rational" => Ok(AnyJets::Rational(PointJets::from_json(v)?)),
            "pi" => Ok(AnyJets::Pi(PointJets::from_json(v)?)),
            "float" => Ok(AnyJets::Float(PointJets::from_json(v)?)),
            other => Err(perr(format!("unknown mode {other}"))),
        }
    }

    pub fn from_str(s: &str) -> Result<Self> {
        let v: Value = serde_json::from_str(s).map_err(|e| perr(e.to_string()))?;
        Self::from_json(&v)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::jets::random_jets;


    #[test]
    fn rational_strings() {
        assert_eq!(Rat::from_json(&json!(["3/4", -2])).unwrap(), Rat::new(BigRational::new(3.into(), 4.into()), BigRational::from_integer((-2).into())));
        assert!(Rat::from_json(&json!(["1/0", 0])).is_err());
        assert!(matches!(Rat::from_json(&json!({"1": [1, 0]})), Err(Error::PiUnavailable)));
    }

    #[test]
    fn pi_graded_round_trip() {
        let x = PiRat::pi().unwrap().scale(&PiRat::from_ratio(-3, 2)).add(&PiRat::one());
        assert_eq!(PiRat::from_json(&x.to_json()).unwrap(), x);
    }

    #[test]
    fn jets_round_trip() {
        let j: PointJets<Rat> = random_jets(2, 2, 4, false).unwrap();
        let back = PointJets::<Rat>::from_json(&j.to_json()).unwrap();
        assert_eq!(back, j);
        let k: PointJets<PiRat> = random_jets(1, 1, 4, true).unwrap();
        match AnyJets::from_str(&k.to_json().to_string()).unwrap() {
            AnyJets::Pi(p) => assert_eq!(p, k),
            other => panic!("wrong mode: {other:?}"),
        }
    }

    #[test]
    fn inconsistent_override_rejected() {
        let j: PointJets<Rat> = random_jets(1, 1, 2, false).unwrap();
        let mut v = j.to_json();
        v["dtau"] = json!([[7, 0], [0, 0]]);
        assert!(matches!(PointJets::<Rat>::from_json(&v), Err(Error::InvalidJets(_))));
    }
}
