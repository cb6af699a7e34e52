use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::One;

use super::coeff::{int, Coeff};
use crate::error::{Error, Result};
use crate::trigcalc::symbol::Side;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Trig {
    Cos,
    Sin,
}

/// Basis element `θ^k · cos(jθ)` or `θ^k · sin(jθ)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Basis {
    pub k: u32,
    pub j: u32,
    pub kind: Trig,
}

impl Basis {
    pub fn new(k: u32, j: u32, kind: Trig) -> Self {
        assert!(!(kind == Trig::Sin && j == 0), "sin(0θ) is not a basis element");
        Basis { k, j, kind }
    }
}

/// Exact element of the span of `θ^k cos(jθ)`, `θ^k sin(jθ)` over `C`.
#[derive(Clone, PartialEq)]
pub struct ThetaFourierPoly<C> {
    terms: BTreeMap<Basis, C>,
}

/// `sin(nθ)` for a signed harmonic index, folded onto `j ≥ 1`.
fn push_sin<C: Coeff>(out: &mut Vec<(Basis, C)>, k: u32, n: i64, c: C) {
    match n.cmp(&0) {
        std::cmp::Ordering::Greater => out.push((Basis::new(k, n as u32, Trig::Sin), c)),
        std::cmp::Ordering::Less => out.push((Basis::new(k, (-n) as u32, Trig::Sin), c.neg())),
        std::cmp::Ordering::Equal => {}
    }
}

impl<C: Coeff> ThetaFourierPoly<C> {
    pub fn zero() -> Self {
        ThetaFourierPoly { terms: BTreeMap::new() }
    }

    pub fn constant(c: C) -> Self {
        Self::term(Basis::new(0, 0, Trig::Cos), c)
    }

    pub fn term(b: Basis, c: C) -> Self {
        let mut p = Self::zero();
        p.add_term(b, &c);
        p
    }

    pub fn cos(j: u32) -> Self {
        Self::term(Basis::new(0, j, Trig::Cos), C::one())
    }

    pub fn sin(j: u32) -> Self {
        Self::term(Basis::new(0, j, Trig::Sin), C::one())
    }

    pub fn theta() -> Self {
        Self::term(Basis::new(1, 0, Trig::Cos), C::one())
    }

    pub fn from_terms(it: impl IntoIterator<Item = (Basis, C)>) -> Self {
        let mut p = Self::zero();
        for (b, c) in it {
            p.add_term(b, &c);
        }
        p
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Basis, &C)> {
        self.terms.iter()
    }

    pub fn coeff(&self, b: &Basis) -> C {
        self.terms.get(b).cloned().unwrap_or_else(C::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add_term(&mut self, b: Basis, c: &C) {
        if c.is_zero() {
            return;
        }
        match self.terms.get_mut(&b) {
            Some(v) => {
                v.add_assign(c);
                if v.is_zero() {
                    self.terms.remove(&b);
                }
            }
            None => {
                self.terms.insert(b, c.clone());
            }
        }
    }

    /// Largest θ-power present.
    pub fn theta_degree(&self) -> u32 {
        self.terms.keys().map(|b| b.k).max().unwrap_or(0)
    }

    /// Largest harmonic index present.
    pub fn harmonic_degree(&self) -> u32 {
        self.terms.keys().map(|b| b.j).max().unwrap_or(0)
    }

    pub fn check_caps(&self, max_k: u32, max_j: u32) -> Result<()> {
        let (k, j) = (self.theta_degree(), self.harmonic_degree());
        if k > max_k || j > max_j {
            return Err(Error::CapExceeded(format!(
                "θ-power {k} (cap {max_k}), harmonic {j} (cap {max_j})"
            )));
        }
        Ok(())
    }

    pub fn add(&self, rhs: &Self) -> Self {
        let mut out = self.clone();
        for (b, c) in &rhs.terms {
            out.add_term(*b, c);
        }
        out
    }

    pub fn sub(&self, rhs: &Self) -> Self {
        self.add(&rhs.neg())
    }

    pub fn neg(&self) -> Self {
        ThetaFourierPoly { terms: self.terms.iter().map(|(b, c)| (*b, c.neg())).collect() }
    }

    pub fn scale(&self, c: &C) -> Self {
        Self::from_terms(self.terms.iter().map(|(b, v)| (*b, v.mul(c))))
    }

    pub fn map_coeffs<D: Coeff>(&self, f: impl Fn(&C) -> D) -> ThetaFourierPoly<D> {
        ThetaFourierPoly::from_terms(self.terms.iter().map(|(b, c)| (*b, f(c))))
    }

    /// Product, linearized with the product-to-sum identities.
    pub fn mul(&self, rhs: &Self) -> Self {
        let half = C::from_rational(&BigRational::new(BigInt::one(), BigInt::from(2)));
        let mut acc: Vec<(Basis, C)> = Vec::new();
        for (ba, ca) in &self.terms {
            for (bb, cb) in &rhs.terms {
                let c = ca.mul(cb);
                let k = ba.k + bb.k;
                let (a, b) = (ba.j as i64, bb.j as i64);
                let diff = (a - b).unsigned_abs() as u32;
                let sum = (a + b) as u32;
                match (ba.kind, bb.kind) {
                    (Trig::Cos, Trig::Cos) => {
                        acc.push((Basis::new(k, diff, Trig::Cos), c.clone()));
                        acc.push((Basis::new(k, sum, Trig::Cos), c));
                    }
                    (Trig::Sin, Trig::Sin) => {
                        acc.push((Basis::new(k, diff, Trig::Cos), c.clone()));
                        acc.push((Basis::new(k, sum, Trig::Cos), c.neg()));
                    }
                    (Trig::Sin, Trig::Cos) => {
                        push_sin(&mut acc, k, a + b, c.clone());
                        push_sin(&mut acc, k, a - b, c);
                    }
                    (Trig::Cos, Trig::Sin) => {
                        push_sin(&mut acc, k, a + b, c.clone());
                        push_sin(&mut acc, k, b - a, c);
                    }
                }
            }
        }
        let mut out = Self::zero();
        for (b, c) in acc {
            out.add_term(b, &c.mul(&half));
        }
        out
    }

    pub fn pow(&self, e: u32) -> Self {
        let mut acc = Self::constant(C::one());
        for _ in 0..e {
            acc = acc.mul(self);
        }
        acc
    }

    /// Linearizes `Σ c_{m,n} cos^m θ sin^n θ`.
    pub fn from_power_basis(c: &BTreeMap<(u32, u32), C>) -> Self {
        let cos = Self::cos(1);
        let sin = Self::sin(1);
        let mut cos_pows: Vec<Self> = vec![Self::constant(C::one())];
        let mut sin_pows: Vec<Self> = vec![Self::constant(C::one())];
        let mut out = Self::zero();
        for (&(m, n), v) in c {
            while cos_pows.len() <= m as usize {
                let next = cos_pows.last().expect("nonempty").mul(&cos);
                cos_pows.push(next);
            }
            while sin_pows.len() <= n as usize {
                let next = sin_pows.last().expect("nonempty").mul(&sin);
                sin_pows.push(next);
            }
            out = out.add(&cos_pows[m as usize].mul(&sin_pows[n as usize]).scale(v));
        }
        out
    }

    /// The antiderivative vanishing at `θ = 0`.
    pub fn integrate(&self) -> Self {
        let mut out = Self::zero();
        for (b, c) in &self.terms {
            if b.j == 0 {
                out.add_term(Basis::new(b.k + 1, 0, Trig::Cos), &c.mul(&C::from_rational(&BigRational::new(
                    BigInt::one(),
                    BigInt::from(b.k + 1),
                ))));
                continue;
            }
            let j = BigInt::from(b.j);
            // signs of (sin, cos) in the m-th integration-by-parts term
            let pattern: [(Trig, i64); 4] = match b.kind {
                Trig::Cos => [(Trig::Sin, 1), (Trig::Cos, 1), (Trig::Sin, -1), (Trig::Cos, -1)],
                Trig::Sin => [(Trig::Cos, -1), (Trig::Sin, 1), (Trig::Cos, 1), (Trig::Sin, -1)],
            };
            let mut falling = BigInt::one();
            let mut jpow = j.clone();
            for m in 0..=b.k {
                let (kind, sign) = pattern[(m % 4) as usize];
                let q = BigRational::new(falling.clone() * sign, jpow.clone());
                let cq = c.mul(&C::from_rational(&q));
                out.add_term(Basis::new(b.k - m, b.j, kind), &cq);
                if m == b.k && kind == Trig::Cos {
                    out.add_term(Basis::new(0, 0, Trig::Cos), &cq.neg());
                }
                falling *= BigInt::from(b.k - m);
                jpow *= &j;
            }
        }
        out
    }

    pub fn derivative(&self) -> Self {
        let mut out = Self::zero();
        for (b, c) in &self.terms {
            if b.k > 0 {
                out.add_term(Basis::new(b.k - 1, b.j, b.kind), &c.mul(&C::from_int(b.k as i64)));
            }
            if b.j > 0 {
                let jc = C::from_int(b.j as i64);
                match b.kind {
                    Trig::Cos => out.add_term(Basis::new(b.k, b.j, Trig::Sin), &c.mul(&jc).neg()),
                    Trig::Sin => out.add_term(Basis::new(b.k, b.j, Trig::Cos), &c.mul(&jc)),
                }
            }
        }
        out
    }

    /// Value at `θ = ±π` as coefficients of `π^0, π^1, …`.
    pub fn eval_pi_powers(&self, side: Side) -> Vec<C> {
        let mut out = vec![C::zero(); self.theta_degree() as usize + 1];
        for (b, c) in &self.terms {
            if b.kind == Trig::Sin {
                continue;
            }
            let neg = (b.j % 2 == 1) ^ (side == Side::Minus && b.k % 2 == 1);
            if neg {
                out[b.k as usize].sub_assign(c);
            } else {
                out[b.k as usize].add_assign(c);
            }
        }
        while out.len() > 1 && out.last().is_some_and(Coeff::is_zero) {
            out.pop();
        }
        out
    }

    /// Value at `θ = 0`.
    pub fn eval_zero(&self) -> C {
        let mut acc = C::zero();
        for (b, c) in &self.terms {
            if b.k == 0 && b.kind == Trig::Cos {
                acc.add_assign(c);
            }
        }
        acc
    }

    pub fn eval_f64(&self, theta: f64, coeff: impl Fn(&C) -> f64) -> f64 {
        self.terms
            .iter()
            .map(|(b, c)| {
                let t = match b.kind {
                    Trig::Cos => (b.j as f64 * theta).cos(),
                    Trig::Sin => (b.j as f64 * theta).sin(),
                };
                coeff(c) * theta.powi(b.k as i32) * t
            })
            .sum()
    }

    /// Substitutes `θ ↦ θ + α` given `cos α` and `sin α` in the coefficient ring.
    pub fn rotate_by(&self, cos_a: &C, sin_a: &C) -> Result<Self> {
        if self.theta_degree() > 0 {
            return Err(Error::Invalid("rotation requires a θ-free trigonometric polynomial".into()));
        }
        let jmax = self.harmonic_degree() as usize;
        // (cos jα, sin jα) by repeated angle addition
        let mut cs = vec![(C::one(), C::zero())];
        for j in 1..=jmax {
            let (cp, sp) = &cs[j - 1];
            let c = cp.mul(cos_a).sub(&sp.mul(sin_a));
            let s = sp.mul(cos_a).add(&cp.mul(sin_a));
            cs.push((c, s));
        }
        let mut out = Self::zero();
        for (b, v) in &self.terms {
            let (cj, sj) = &cs[b.j as usize];
            match b.kind {
                Trig::Cos => {
                    out.add_term(Basis::new(0, b.j, Trig::Cos), &v.mul(cj));
                    if b.j > 0 {
                        out.add_term(Basis::new(0, b.j, Trig::Sin), &v.mul(sj).neg());
                    }
                }
                Trig::Sin => {
                    out.add_term(Basis::new(0, b.j, Trig::Cos), &v.mul(sj));
                    out.add_term(Basis::new(0, b.j, Trig::Sin), &v.mul(cj));
                }
            }
        }
        Ok(out)
    }

    /// Substitutes `θ ↦ θ + α` where the line slope parameter `τ` fixes
    /// `cos α = (1−τ²)/(1+τ²)` and `sin α = 2τ/(1+τ²)`.
    pub fn rotate(&self, tau: &BigRational) -> Result<Self> {
        if tau < &int(-1) || tau >= &int(1) {
            return Err(Error::Invalid(format!("τ = {tau} outside [-1, 1)")));
        }
        let (c, s) = cos_sin_from_tau(tau);
        self.rotate_by(&C::from_rational(&c), &C::from_rational(&s))
    }
}

/// `(cos α, sin α)` of the rational parametrization of the circle.
pub fn cos_sin_from_tau(tau: &BigRational) -> (BigRational, BigRational) {
    let one = int(1);
    let t2 = tau * tau;
    let den = &one + &t2;
    ((&one - &t2) / &den, (tau * int(2)) / den)
}

impl<C: Coeff + fmt::Display> fmt::Display for ThetaFourierPoly<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, (b, c)) in self.terms.iter().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            write!(f, "({c})")?;
            if b.k > 0 {
                write!(f, "·θ^{}", b.k)?;
            }
            if b.j > 0 {
                let name = if b.kind == Trig::Cos { "cos" } else { "sin" };
                write!(f, "·{name}({}θ)", b.j)?;
            }
        }
        Ok(())
    }
}

impl<C: Coeff> fmt::Debug for ThetaFourierPoly<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_map().entries(self.terms.iter()).finish()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::trigcalc::coeff::rat;

    type T = ThetaFourierPoly<BigRational>;

    fn c(j: u32) -> T {
        T::cos(j)
    }
    fn s(j: u32) -> T {
        T::sin(j)
    }
    fn k(q: BigRational) -> T {
        T::constant(q)
    }

    #[test]
    fn products() {
        assert_eq!(c(1).mul(&s(1)), s(2).scale(&rat(1, 2)));
        assert_eq!(c(1).mul(&c(1)), k(rat(1, 2)).add(&c(2).scale(&rat(1, 2))));
        assert_eq!(T::theta().mul(&c(1)).mul(&s(1)), T::theta().mul(&s(2)).scale(&rat(1, 2)));
        assert!(T::theta().mul(&c(1)).add(&T::theta().mul(&c(1)).neg()).is_empty());
    }

    #[test]
    fn power_basis() {
        let mut m = BTreeMap::new();
        m.insert((3, 0), int(1));
        assert_eq!(T::from_power_basis(&m), c(1).scale(&rat(3, 4)).add(&c(3).scale(&rat(1, 4))));
        let mut m = BTreeMap::new();
        m.insert((0, 2), int(1));
        assert_eq!(T::from_power_basis(&m), k(rat(1, 2)).sub(&c(2).scale(&rat(1, 2))));
        let mut m = BTreeMap::new();
        m.insert((2, 1), int(1));
        assert_eq!(T::from_power_basis(&m), s(1).scale(&rat(1, 4)).add(&s(3).scale(&rat(1, 4))));
    }

    #[test]
    fn integration() {
        assert_eq!(c(1).integrate(), s(1));
        let cos2 = c(1).mul(&c(1));
        assert_eq!(cos2.integrate(), T::theta().scale(&rat(1, 2)).add(&s(2).scale(&rat(1, 4))));
        let tc = T::theta().mul(&c(1));
        assert_eq!(tc.integrate(), T::theta().mul(&s(1)).add(&c(1)).sub(&k(int(1))));
        assert_eq!(tc.integrate().derivative(), tc);
    }

    #[test]
    fn evaluation_at_pi() {
        assert_eq!(s(1).eval_pi_powers(Side::Plus), vec![int(0)]);
        let p = T::theta().scale(&rat(1, 2)).add(&s(2).scale(&rat(1, 4)));
        assert_eq!(p.eval_pi_powers(Side::Plus), vec![int(0), rat(1, 2)]);
        let q = T::term(Basis::new(2, 3, Trig::Cos), int(1));
        assert_eq!(q.eval_pi_powers(Side::Minus), vec![int(0), int(0), int(-1)]);
    }

    #[test]
    fn rotation() {
        assert_eq!(c(1).rotate(&int(0)).unwrap(), c(1));
        let half = rat(1, 2);
        assert_eq!(c(1).rotate(&half).unwrap(), c(1).scale(&rat(3, 5)).sub(&s(1).scale(&rat(4, 5))));
        assert_eq!(s(1).rotate(&half).unwrap(), c(1).scale(&rat(4, 5)).add(&s(1).scale(&rat(3, 5))));
        assert!(T::theta().rotate(&half).is_err());
        assert!(c(1).rotate(&int(1)).is_err());
    }
}
