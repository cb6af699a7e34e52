use std::fmt;

use num_rational::BigRational;
use num_traits::Zero;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::coeff::{format_rational, parse_rational, q0, q1, rational_to_f64, Coeff};

/// Polynomial in π with exact rational coefficients, `coeffs[k]` multiplying `π^k`.
///
/// π is a transcendental indeterminate here: two values are equal only when
/// every coefficient agrees. Trailing zero coefficients are never stored.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct PiPoly {
    coeffs: Vec<BigRational>,
}

impl PiPoly {
    pub fn new(mut coeffs: Vec<BigRational>) -> Self {
        while coeffs.last().is_some_and(Zero::is_zero) {
            coeffs.pop();
        }
        PiPoly { coeffs }
    }

    pub fn constant(q: BigRational) -> Self {
        Self::new(vec![q])
    }

    /// `q · π^k`
    pub fn monomial(q: BigRational, k: usize) -> Self {
        let mut c = vec![q0(); k + 1];
        c[k] = q;
        Self::new(c)
    }

    pub fn pi() -> Self {
        Self::monomial(q1(), 1)
    }

    pub fn coeffs(&self) -> &[BigRational] {
        &self.coeffs
    }

    pub fn coeff(&self, k: usize) -> BigRational {
        self.coeffs.get(k).cloned().unwrap_or_else(q0)
    }

    /// Degree in π; `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn leading(&self) -> Option<&BigRational> {
        self.coeffs.last()
    }

    pub fn is_rational(&self) -> bool {
        self.coeffs.len() <= 1
    }

    pub fn scale(&self, q: &BigRational) -> Self {
        if Zero::is_zero(q) {
            return Self::default();
        }
        PiPoly { coeffs: self.coeffs.iter().map(|c| c * q).collect() }
    }

    pub fn eval_f64(&self, pi: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, c| acc * pi + rational_to_f64(c))
    }

    pub fn eval_rational(&self, pi: &BigRational) -> BigRational {
        self.coeffs.iter().rev().fold(q0(), |acc, c| acc * pi + c)
    }

    /// Euclidean division over `Q[π]`.
    pub fn div_rem(&self, d: &PiPoly) -> (PiPoly, PiPoly) {
        let dd = d.degree().expect("division by the zero π-polynomial");
        let lead = d.leading().expect("nonzero").clone();
        let mut rem = self.coeffs.clone();
        if rem.len() <= dd {
            return (PiPoly::default(), self.clone());
        }
        let mut quot = vec![q0(); rem.len() - dd];
        for k in (0..quot.len()).rev() {
            let c = &rem[k + dd] / &lead;
            if !Zero::is_zero(&c) {
                for (i, dc) in d.coeffs.iter().enumerate() {
                    rem[k + i] -= &c * dc;
                }
            }
            quot[k] = c;
        }
        rem.truncate(dd);
        (PiPoly::new(quot), PiPoly::new(rem))
    }

    /// Monic greatest common divisor over `Q[π]`.
    pub fn gcd(&self, other: &PiPoly) -> PiPoly {
        let (mut a, mut b) = (self.clone(), other.clone());
        while !b.is_zero_poly() {
            let (_, r) = a.div_rem(&b);
            a = b;
            b = r;
        }
        a.monic()
    }

    pub fn monic(&self) -> PiPoly {
        match self.leading() {
            None => PiPoly::default(),
            Some(l) => self.scale(&l.recip()),
        }
    }

    pub fn is_zero_poly(&self) -> bool {
        self.coeffs.is_empty()
    }
}

impl Coeff for PiPoly {
    fn zero() -> Self {
        PiPoly::default()
    }
    fn one() -> Self {
        PiPoly::constant(q1())
    }
    fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }
    fn add(&self, rhs: &Self) -> Self {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        PiPoly::new((0..n).map(|k| self.coeff(k) + rhs.coeff(k)).collect())
    }
    fn sub(&self, rhs: &Self) -> Self {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        PiPoly::new((0..n).map(|k| self.coeff(k) - rhs.coeff(k)).collect())
    }
    fn mul(&self, rhs: &Self) -> Self {
        if self.coeffs.is_empty() || rhs.coeffs.is_empty() {
            return PiPoly::default();
        }
        let mut out = vec![q0(); self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if Zero::is_zero(a) {
                continue;
            }
            for (j, b) in rhs.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        PiPoly::new(out)
    }
    fn neg(&self) -> Self {
        PiPoly { coeffs: self.coeffs.iter().map(|c| -c).collect() }
    }
    fn from_rational(q: &BigRational) -> Self {
        PiPoly::constant(q.clone())
    }
}

impl fmt::Debug for PiPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Display for PiPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.coeffs.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (k, c) in self.coeffs.iter().enumerate() {
            if Zero::is_zero(c) {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            match k {
                0 => write!(f, "{}", format_rational(c))?,
                1 => write!(f, "({})π", format_rational(c))?,
                _ => write!(f, "({})π^{k}", format_rational(c))?,
            }
        }
        Ok(())
    }
}

impl Serialize for PiPoly {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let v: Vec<String> = self.coeffs.iter().map(format_rational).collect();
        v.serialize(s)
    }
}

impl<'de> Deserialize<'de> for PiPoly {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let v: Vec<String> = Vec::deserialize(d)?;
        let coeffs = v
            .iter()
            .map(|s| parse_rational(s).map_err(serde::de::Error::custom))
            .collect::<std::result::Result<Vec<_>, _>>()?;
        Ok(PiPoly::new(coeffs))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::trigcalc::coeff::rat;

    #[test]
    fn trailing_zeros_trimmed() {
        let p = PiPoly::new(vec![rat(1, 2), q0()]);
        assert_eq!(p.degree(), Some(0));
        assert!(PiPoly::new(vec![q0()]).is_zero_poly());
    }

    #[test]
    fn gcd_of_products() {
        // (π+1)(π-2) and (π+1)(3π)
        let a = PiPoly::new(vec![rat(-2, 1), rat(-1, 1), rat(1, 1)]);
        let b = PiPoly::new(vec![rat(0, 1), rat(3, 1), rat(3, 1)]);
        assert_eq!(a.gcd(&b), PiPoly::new(vec![rat(1, 1), rat(1, 1)]));
    }

    #[test]
    fn serde_round_trip() {
        let p = PiPoly::new(vec![rat(-10368, 28125), rat(-151200, 28125)]);
        let s = serde_json::to_string(&p).unwrap();
        assert_eq!(s, r#"["-1152/3125","-672/125"]"#);
        let q: PiPoly = serde_json::from_str(&s).unwrap();
        assert_eq!(p, q);
    }
}
