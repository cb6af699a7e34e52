//! First-order coefficients with the line slope `τ` kept symbolic.
//!
//! The halves are rotated by a formal angle with `cos α`, `sin α` as ring
//! symbols; after the expansion `(cos α, sin α)` is replaced by the rational
//! parametrization `((1−τ²)/(1+τ²), 2τ/(1+τ²))`.

use std::fmt;

use num_rational::BigRational;

use super::dense::Dense;
use super::engine::{self, Limits, Options, PertInput, SideInput};
use crate::error::{Error, Result};
use crate::systems::{unrotated_halves, CaseName, HalfSystemPolar};
use crate::trigcalc::coeff::{int, q1};
use crate::trigcalc::{Coeff, Monomial, ParamPoly, PiPoly, Poly, Symbol};

type Q = BigRational;
type CsPoly = Poly<Q>;

/// `num / (1+τ²)^den_pow` with `num` a polynomial in `τ` and the parameters.
#[derive(Clone, Debug, PartialEq)]
pub struct TauRational {
    pub num: ParamPoly,
    pub den_pow: u32,
}

impl TauRational {
    /// Specializes `τ` to a rational value.
    pub fn eval(&self, tau: &Q) -> ParamPoly {
        let mut out = ParamPoly::zero();
        for (m, c) in self.num.terms() {
            let k = m.exponent(Symbol::Tau);
            let f = num_traits::pow(tau.clone(), k as usize);
            out.add_term(m.without(Symbol::Tau), &c.scale(&f));
        }
        let den = num_traits::pow(q1() + tau * tau, self.den_pow as usize);
        out.scale(&PiPoly::constant(q1() / den))
    }

    /// Tests `self == num / den` by cross-multiplication.
    pub fn equals_fraction(&self, num: &ParamPoly, den: &ParamPoly) -> bool {
        let lhs = self.num.mul(den);
        let rhs = num.mul(&one_plus_tau2_pow(self.den_pow));
        lhs == rhs
    }
}

impl fmt::Display for TauRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}) / (1+tau^2)^{}", self.num, self.den_pow)
    }
}

fn one_plus_tau2_pow(k: u32) -> ParamPoly {
    let t2 = ParamPoly::var(Symbol::Tau).mul(&ParamPoly::var(Symbol::Tau));
    let base = ParamPoly::constant(PiPoly::constant(q1())).add(&t2);
    (0..k).fold(ParamPoly::constant(PiPoly::constant(q1())), |acc, _| acc.mul(&base))
}

/// `ψ_{1,j}` for `j ≤ n` with symbolic `τ`.
#[derive(Clone, Debug)]
pub struct TauJet {
    pub name: CaseName,
    pub n: usize,
    /// `psi1[j]`; index 0 is present and zero.
    pub psi1: Vec<TauRational>,
}

fn symbolic_input(h: &HalfSystemPolar) -> Result<SideInput<CsPoly>> {
    let ca = CsPoly::var(Symbol::CosAlpha);
    let sa = CsPoly::var(Symbol::SinAlpha);
    let lift = |t: &crate::systems::RatFourier| -> Result<Dense<CsPoly>> {
        let p = t.map_coeffs(|c| CsPoly::constant(c.clone())).rotate_by(&ca, &sa)?;
        Ok(Dense::from_sparse(&p, CsPoly::clone))
    };
    Ok(SideInput {
        side: h.side,
        a: lift(&h.f0)?,
        b: lift(&h.g0)?,
        pert: h
            .pert
            .iter()
            .map(|p| Ok(PertInput { degree: p.degree as usize, u: lift(&p.u)?, w: lift(&p.w)? }))
            .collect::<Result<_>>()?,
    })
}

/// Replaces `cos α`, `sin α` and multiplies by `(1+τ²)^deg`.
fn cs_to_tau(p: &CsPoly, deg: u32) -> Vec<Q> {
    // (1−τ²)^i (2τ)^k (1+τ²)^{deg−i−k} as a coefficient list in τ
    let mul = |a: &[Q], b: &[Q]| -> Vec<Q> {
        let mut out = vec![int(0); a.len() + b.len() - 1];
        for (i, x) in a.iter().enumerate() {
            for (j, y) in b.iter().enumerate() {
                out[i + j] += x * y;
            }
        }
        out
    };
    let pw = |base: &[Q], e: u32| (0..e).fold(vec![int(1)], |acc, _| mul(&acc, base));
    let mut out: Vec<Q> = vec![];
    for (m, c) in p.terms() {
        let i = m.exponent(Symbol::CosAlpha);
        let k = m.exponent(Symbol::SinAlpha);
        let t = mul(&mul(&pw(&[int(1), int(0), int(-1)], i), &pw(&[int(0), int(2)], k)), &pw(&[int(1), int(0), int(1)], deg - i - k));
        if out.len() < t.len() {
            out.resize(t.len(), int(0));
        }
        for (o, v) in out.iter_mut().zip(&t) {
            *o += c * v;
        }
    }
    out
}

/// Divides a τ-coefficient list by `1+τ²` if possible.
fn div_one_plus_tau2(c: &[ParamPoly]) -> Option<Vec<ParamPoly>> {
    if c.len() < 3 {
        return if c.iter().all(Coeff::is_zero) { Some(vec![]) } else { None };
    }
    let mut rem: Vec<ParamPoly> = c.to_vec();
    let mut q = vec![ParamPoly::zero(); c.len() - 2];
    for k in (2..c.len()).rev() {
        let lead = rem[k].clone();
        q[k - 2] = lead.clone();
        rem[k - 2] = rem[k - 2].sub(&lead);
        rem[k] = ParamPoly::zero();
    }
    if rem[0].is_zero() && rem[1].is_zero() {
        Some(q)
    } else {
        None
    }
}

fn side_psi1(h: &HalfSystemPolar, n: usize) -> Result<Vec<Vec<(Symbol, Vec<CsPoly>)>>> {
    let inp = symbolic_input(h)?;
    let r = engine::run_side(&inp, &Limits::new(n), &Options { order: 1, full: false })?;
    Ok((0..=n)
        .map(|j| {
            r.psi1
                .iter()
                .enumerate()
                .map(|(p, s)| (Symbol::Pert(h.pert[p].symbol), s[j].clone()))
                .collect()
        })
        .collect())
}

/// Computes `ψ_{1,j}`, `j ≤ n`, as exact rational functions of `τ`.
pub fn difference_symbolic_tau(name: CaseName, n: usize) -> Result<TauJet> {
    if !(2..=12).contains(&n) {
        return Err(Error::Invalid(format!("symbolic τ supports N in 2..=12, got {n}")));
    }
    if name.plus != name.minus && name != CaseName::S1S2 {
        return Err(Error::NotCenter(format!("{name} is a piecewise center only for τ = 0")));
    }
    let (plus, minus) = unrotated_halves(name);
    let sp = side_psi1(&plus, n)?;
    let sm = side_psi1(&minus, n)?;
    let mut psi1 = Vec::with_capacity(n + 1);
    for j in 0..=n {
        // (symbol, sign, π-power, cs-polynomial)
        let mut parts: Vec<(Symbol, i64, usize, &CsPoly)> = Vec::new();
        for (s, v) in &sp[j] {
            for (k, p) in v.iter().enumerate() {
                parts.push((*s, 1, k, p));
            }
        }
        for (s, v) in &sm[j] {
            for (k, p) in v.iter().enumerate() {
                parts.push((*s, -1, k, p));
            }
        }
        let deg = parts.iter().filter_map(|x| x.3.total_degree()).max().unwrap_or(0);
        // coefficient list in τ, each a ParamPoly
        let mut coeffs: Vec<ParamPoly> = Vec::new();
        for (s, sign, k, p) in parts {
            let t = cs_to_tau(p, deg);
            if coeffs.len() < t.len() {
                coeffs.resize(t.len(), ParamPoly::zero());
            }
            for (e, v) in t.iter().enumerate() {
                if v != &int(0) {
                    let c = PiPoly::monomial(v * int(sign), k);
                    coeffs[e].add_term(Monomial::var(s), &c);
                }
            }
        }
        let mut den_pow = deg;
        while den_pow > 0 {
            match div_one_plus_tau2(&coeffs) {
                Some(q) => {
                    coeffs = q;
                    den_pow -= 1;
                }
                None => break,
            }
        }
        let mut num = ParamPoly::zero();
        for (e, c) in coeffs.iter().enumerate() {
            let tm = if e == 0 { Monomial::one() } else { Monomial::from_pairs(vec![(Symbol::Tau, e as u32)]) };
            num = num.add(&c.mul_monomial(&tm));
        }
        psi1.push(TauRational { num, den_pow: if num_is_zero(&coeffs) { 0 } else { den_pow } });
    }
    Ok(TauJet { name, n, psi1 })
}

fn num_is_zero(c: &[ParamPoly]) -> bool {
    c.iter().all(Coeff::is_zero)
}
