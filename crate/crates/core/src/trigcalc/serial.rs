//! Structured-text encoding of the kernel types.
//!
//! Rationals are `"p/q"` strings, π-polynomials are arrays of such strings by
//! π-power, parameter polynomials are arrays of `{mono, coeff}` records and
//! θ-Fourier polynomials are arrays of `{k, j, kind, coeff}` records.

use num_rational::BigRational;
use serde_json::{json, Value};

use super::coeff::{format_rational, parse_rational, Coeff};
use super::fourier::{Basis, ThetaFourierPoly, Trig};
use super::pipoly::PiPoly;
use super::poly::{Monomial, Poly};
use super::symbol::Symbol;
use crate::error::{Error, Result};

pub trait JsonCoeff: Sized {
    fn to_json(&self) -> Value;
    fn from_json(v: &Value) -> Result<Self>;
}

fn malformed(what: &str) -> Error {
    Error::Parse(format!("malformed {what}"))
}

impl JsonCoeff for BigRational {
    fn to_json(&self) -> Value {
        Value::String(format_rational(self))
    }
    fn from_json(v: &Value) -> Result<Self> {
        parse_rational(v.as_str().ok_or_else(|| malformed("rational"))?)
    }
}

impl JsonCoeff for PiPoly {
    fn to_json(&self) -> Value {
        serde_json::to_value(self).expect("plain array")
    }
    fn from_json(v: &Value) -> Result<Self> {
        Ok(serde_json::from_value(v.clone())?)
    }
}

impl<C: Coeff + JsonCoeff> JsonCoeff for Poly<C> {
    fn to_json(&self) -> Value {
        Value::Array(
            self.terms()
                .map(|(m, c)| {
                    let mono: Vec<Value> = m.pairs().iter().map(|(s, e)| json!([s.to_string(), e])).collect();
                    json!({ "mono": mono, "coeff": c.to_json() })
                })
                .collect(),
        )
    }
    fn from_json(v: &Value) -> Result<Self> {
        let arr = v.as_array().ok_or_else(|| malformed("polynomial"))?;
        let mut terms = Vec::with_capacity(arr.len());
        for t in arr {
            let mono = t["mono"].as_array().ok_or_else(|| malformed("monomial"))?;
            let mut pairs = Vec::with_capacity(mono.len());
            for p in mono {
                let s: Symbol = p[0].as_str().ok_or_else(|| malformed("symbol"))?.parse()?;
                let e = p[1].as_u64().ok_or_else(|| malformed("exponent"))? as u32;
                pairs.push((s, e));
            }
            terms.push((Monomial::from_pairs(pairs), C::from_json(&t["coeff"])?));
        }
        Ok(Poly::from_terms(terms))
    }
}

impl<C: Coeff + JsonCoeff> JsonCoeff for ThetaFourierPoly<C> {
    fn to_json(&self) -> Value {
        Value::Array(
            self.terms()
                .map(|(b, c)| {
                    let kind = if b.kind == Trig::Cos { "cos" } else { "sin" };
                    json!({ "k": b.k, "j": b.j, "kind": kind, "coeff": c.to_json() })
                })
                .collect(),
        )
    }
    fn from_json(v: &Value) -> Result<Self> {
        let arr = v.as_array().ok_or_else(|| malformed("fourier polynomial"))?;
        let mut terms = Vec::with_capacity(arr.len());
        for t in arr {
            let k = t["k"].as_u64().ok_or_else(|| malformed("k"))? as u32;
            let j = t["j"].as_u64().ok_or_else(|| malformed("j"))? as u32;
            let kind = match t["kind"].as_str() {
                Some("cos") => Trig::Cos,
                Some("sin") if j > 0 => Trig::Sin,
                _ => return Err(malformed("kind")),
            };
            terms.push((Basis::new(k, j, kind), C::from_json(&t["coeff"])?));
        }
        Ok(ThetaFourierPoly::from_terms(terms))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::trigcalc::coeff::rat;
    use crate::trigcalc::poly::ParamPoly;
    use crate::trigcalc::symbol::{Component, Side};

    #[test]
    fn param_fourier_round_trip() {
        let a = ParamPoly::var(Symbol::pert(Side::Plus, Component::A, (1, 1)));
        let p = a.scale(&PiPoly::new(vec![rat(-3, 7), rat(1, 2)])).add(&ParamPoly::var(Symbol::Gamma(7)));
        let t = ThetaFourierPoly::term(Basis::new(1, 3, Trig::Sin), p.clone()).add(&ThetaFourierPoly::constant(p));
        let v = t.to_json();
        let text = serde_json::to_string(&v).unwrap();
        let back = ThetaFourierPoly::<ParamPoly>::from_json(&serde_json::from_str(&text).unwrap()).unwrap();
        assert_eq!(back, t);
        assert!(text.contains("\"a+11\""));
        assert!(text.contains("\"-3/7\""));
    }
}
