//! The field `Q(π)` of rational functions in π.

use std::fmt;

use num_rational::BigRational;
use serde::{Deserialize, Serialize};

use crate::trigcalc::coeff::{q1, Coeff};
use crate::trigcalc::PiPoly;

/// `num / den` with `den` monic and coprime to `num`.
#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PiFrac {
    num: PiPoly,
    den: PiPoly,
}

impl PiFrac {
    pub fn new(num: PiPoly, den: PiPoly) -> Self {
        assert!(!den.is_zero_poly(), "zero denominator in Q(π)");
        if num.is_zero_poly() {
            return PiFrac { num, den: PiPoly::one() };
        }
        if den.is_rational() {
            let d = den.coeff(0);
            return PiFrac { num: num.scale(&d.recip()), den: PiPoly::one() };
        }
        let g = num.gcd(&den);
        let (num, den) = if g.is_rational() { (num, den) } else { (num.div_rem(&g).0, den.div_rem(&g).0) };
        let lead = den.leading().expect("nonzero").recip();
        PiFrac { num: num.scale(&lead), den: den.scale(&lead) }
    }

    pub fn from_poly(p: PiPoly) -> Self {
        PiFrac { num: p, den: PiPoly::one() }
    }

    pub fn num(&self) -> &PiPoly {
        &self.num
    }

    pub fn den(&self) -> &PiPoly {
        &self.den
    }

    pub fn is_poly(&self) -> bool {
        self.den.is_rational()
    }

    /// The rational value when π does not occur.
    pub fn as_rational(&self) -> Option<BigRational> {
        (self.num.is_rational() && self.den.is_rational()).then(|| self.num.coeff(0))
    }

    pub fn inv(&self) -> Option<Self> {
        (!self.num.is_zero_poly()).then(|| PiFrac::new(self.den.clone(), self.num.clone()))
    }

    pub fn div(&self, o: &Self) -> Option<Self> {
        o.inv().map(|i| self.mul(&i))
    }

    pub fn eval_f64(&self) -> f64 {
        self.num.eval_f64(std::f64::consts::PI) / self.den.eval_f64(std::f64::consts::PI)
    }

    pub fn eval_rational(&self, pi: &BigRational) -> BigRational {
        self.num.eval_rational(pi) / self.den.eval_rational(pi)
    }
}

impl Coeff for PiFrac {
    fn zero() -> Self {
        PiFrac { num: PiPoly::zero(), den: PiPoly::one() }
    }
    fn one() -> Self {
        PiFrac { num: PiPoly::one(), den: PiPoly::one() }
    }
    fn is_zero(&self) -> bool {
        self.num.is_zero_poly()
    }
    fn add(&self, o: &Self) -> Self {
        if self.den == o.den {
            return PiFrac::new(self.num.add(&o.num), self.den.clone());
        }
        PiFrac::new(self.num.mul(&o.den).add(&o.num.mul(&self.den)), self.den.mul(&o.den))
    }
    fn sub(&self, o: &Self) -> Self {
        self.add(&o.neg())
    }
    fn mul(&self, o: &Self) -> Self {
        if self.is_poly() && o.is_poly() {
            return PiFrac { num: self.num.mul(&o.num), den: PiPoly::one() };
        }
        PiFrac::new(self.num.mul(&o.num), self.den.mul(&o.den))
    }
    fn neg(&self) -> Self {
        PiFrac { num: self.num.neg(), den: self.den.clone() }
    }
    fn from_rational(q: &BigRational) -> Self {
        PiFrac::from_poly(PiPoly::constant(q.clone()))
    }
}

impl Default for PiFrac {
    fn default() -> Self {
        Self::zero()
    }
}

impl fmt::Display for PiFrac {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den == PiPoly::constant(q1()) {
            write!(f, "{}", self.num)
        } else {
            write!(f, "({}) / ({})", self.num, self.den)
        }
    }
}

impl fmt::Debug for PiFrac {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::trigcalc::coeff::rat;

    #[test]
    fn field_operations() {
        let pi = PiFrac::from_poly(PiPoly::pi());
        let one_plus_pi = pi.add(&PiFrac::one());
        let x = PiFrac::one().div(&one_plus_pi).unwrap();
        assert_eq!(x.mul(&one_plus_pi), PiFrac::one());
        let y = PiFrac::new(PiPoly::new(vec![rat(2, 1), rat(2, 1)]), PiPoly::new(vec![rat(3, 1), rat(3, 1)]));
        assert_eq!(y.as_rational(), Some(rat(2, 3)));
        assert!((x.eval_f64() - 1.0 / (1.0 + std::f64::consts::PI)).abs() < 1e-15);
    }
}
