//! Center test for mixed combinations through first integrals.
//!
//! On the line through the origin with direction `v`, the orbit of a half
//! system starting at `λ v` lands again on the line at `σ(λ) v` where
//! `H(λ v) = H(σ v)`. Two halves form a center exactly when their landing
//! maps agree; here the maps are compared as power series in `λ`.

use std::collections::BTreeMap;

use num_rational::BigRational;
use num_traits::Zero;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::systems::{builtin_system, LoudSystem};
use crate::trigcalc::coeff::{format_rational, int, q0};
use crate::trigcalc::fourier::cos_sin_from_tau;

pub const DEFAULT_ORDER: usize = 12;

/// Bivariate polynomial in `x, y`, keyed by exponent pair.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct BiPoly(BTreeMap<(u32, u32), BigRational>);

impl BiPoly {
    pub fn from_terms(terms: &[((u32, u32), BigRational)]) -> Self {
        let mut p = BiPoly::default();
        for (e, c) in terms {
            p.add_term(*e, c.clone());
        }
        p
    }

    fn add_term(&mut self, e: (u32, u32), c: BigRational) {
        let v = self.0.entry(e).or_insert_with(q0);
        *v += c;
        if v.is_zero() {
            self.0.remove(&e);
        }
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    pub fn add(&self, o: &BiPoly) -> BiPoly {
        let mut r = self.clone();
        for (e, c) in &o.0 {
            r.add_term(*e, c.clone());
        }
        r
    }

    pub fn sub(&self, o: &BiPoly) -> BiPoly {
        let mut r = self.clone();
        for (e, c) in &o.0 {
            r.add_term(*e, -c);
        }
        r
    }

    pub fn mul(&self, o: &BiPoly) -> BiPoly {
        let mut r = BiPoly::default();
        for (ea, ca) in &self.0 {
            for (eb, cb) in &o.0 {
                r.add_term((ea.0 + eb.0, ea.1 + eb.1), ca * cb);
            }
        }
        r
    }

    pub fn dx(&self) -> BiPoly {
        let mut r = BiPoly::default();
        for (&(a, b), c) in &self.0 {
            if a > 0 {
                r.add_term((a - 1, b), c * int(a as i64));
            }
        }
        r
    }

    pub fn dy(&self) -> BiPoly {
        let mut r = BiPoly::default();
        for (&(a, b), c) in &self.0 {
            if b > 0 {
                r.add_term((a, b - 1), c * int(b as i64));
            }
        }
        r
    }

    /// Restriction to the line `t ↦ (t v1, t v2)` as coefficients in `t`.
    pub fn on_line(&self, v: &(BigRational, BigRational)) -> Vec<BigRational> {
        let deg = self.0.keys().map(|&(a, b)| a + b).max().unwrap_or(0) as usize;
        let mut out = vec![q0(); deg + 1];
        for (&(a, b), c) in &self.0 {
            out[(a + b) as usize] += c * num_traits::pow(v.0.clone(), a as usize) * num_traits::pow(v.1.clone(), b as usize);
        }
        out
    }

    pub fn eval_f64(&self, x: f64, y: f64) -> f64 {
        self.0
            .iter()
            .map(|(&(a, b), c)| crate::trigcalc::coeff::rational_to_f64(c) * x.powi(a as i32) * y.powi(b as i32))
            .sum()
    }
}

/// `H = numerator / denominator`, constant along the orbits of its system.
#[derive(Clone, Debug, PartialEq)]
pub struct FirstIntegral {
    pub system: LoudSystem,
    pub numerator: BiPoly,
    pub denominator: BiPoly,
}

impl FirstIntegral {
    pub fn eval_f64(&self, x: f64, y: f64) -> f64 {
        self.numerator.eval_f64(x, y) / self.denominator.eval_f64(x, y)
    }
}

/// The vector field as polynomials `(P, Q)`.
fn field(s: LoudSystem) -> (BiPoly, BiPoly) {
    let v = builtin_system(s);
    let quad = [(2, 0), (1, 1), (0, 2)];
    let mut p = BiPoly::from_terms(&[((0, 1), int(-1))]);
    let mut q = BiPoly::from_terms(&[((1, 0), int(1))]);
    for (i, e) in quad.iter().enumerate() {
        p.add_term(*e, v.p[i].clone());
        q.add_term(*e, v.q[i].clone());
    }
    (p, q)
}

pub fn first_integral(s: LoudSystem) -> Result<FirstIntegral> {
    let r2 = [((2, 0), int(1)), ((0, 2), int(1))];
    let (num, den) = match s {
        LoudSystem::S1 => (BiPoly::from_terms(&r2), BiPoly::from_terms(&[((0, 0), int(1)), ((0, 1), int(2))])),
        LoudSystem::S2 => {
            let d = BiPoly::from_terms(&[((0, 0), int(1)), ((0, 1), int(1))]);
            (BiPoly::from_terms(&r2), d.mul(&d))
        }
        LoudSystem::S3 => (
            BiPoly::from_terms(&[((2, 0), int(9)), ((0, 2), int(9)), ((2, 1), int(-24)), ((4, 0), int(16))]),
            BiPoly::from_terms(&[((0, 1), int(16)), ((0, 0), int(-3))]),
        ),
        LoudSystem::S4 => {
            let d = BiPoly::from_terms(&[((0, 0), int(3)), ((0, 1), int(8))]);
            (
                BiPoly::from_terms(&[((2, 0), int(9)), ((0, 2), int(9)), ((0, 3), int(24)), ((0, 4), int(16))]),
                d.mul(&d).mul(&d).mul(&d),
            )
        }
    };
    let h = FirstIntegral { system: s, numerator: num, denominator: den };
    verify_first_integral(&h)?;
    Ok(h)
}

/// Checks `∇H · Z ≡ 0` as a polynomial identity.
pub fn verify_first_integral(h: &FirstIntegral) -> Result<()> {
    let (p, q) = field(h.system);
    let (n, d) = (&h.numerator, &h.denominator);
    let hx = n.dx().mul(d).sub(&n.mul(&d.dx()));
    let hy = n.dy().mul(d).sub(&n.mul(&d.dy()));
    if !hx.mul(&p).add(&hy.mul(&q)).is_zero() {
        return Err(Error::Structural(format!("H is not a first integral of {}", h.system)));
    }
    Ok(())
}

/// `σ(λ) = −λ + Σ_{k≥2} s_k λ^k`; `coeffs[k]` is the coefficient of `λ^k`.
#[derive(Clone, Debug, PartialEq)]
pub struct SigmaSeries {
    pub direction: (BigRational, BigRational),
    pub coeffs: Vec<BigRational>,
}

impl SigmaSeries {
    pub fn eval_f64(&self, lambda: f64) -> f64 {
        self.coeffs
            .iter()
            .enumerate()
            .map(|(k, c)| crate::trigcalc::coeff::rational_to_f64(c) * lambda.powi(k as i32))
            .sum()
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }
}

fn series_mul(a: &[BigRational], b: &[BigRational], n: usize) -> Vec<BigRational> {
    let mut out = vec![q0(); n + 1];
    for (i, x) in a.iter().enumerate().take(n + 1) {
        if x.is_zero() {
            continue;
        }
        for (j, y) in b.iter().enumerate().take(n + 1 - i) {
            out[i + j] += x * y;
        }
    }
    out
}

fn series_div(a: &[BigRational], b: &[BigRational], n: usize) -> Vec<BigRational> {
    let mut out = vec![q0(); n + 1];
    for k in 0..=n {
        let mut v = a.get(k).cloned().unwrap_or_else(q0);
        for i in 1..=k {
            if let Some(bi) = b.get(i) {
                v -= bi * &out[k - i];
            }
        }
        out[k] = v / &b[0];
    }
    out
}

/// Composition `h(σ(λ))` truncated at `λ^n`, for `σ` without constant term.
fn compose(h: &[BigRational], sigma: &[BigRational], n: usize) -> Vec<BigRational> {
    let mut out = vec![q0(); n + 1];
    let mut pw = vec![q0(); n + 1];
    pw[0] = int(1);
    for hm in h.iter().take(n + 1) {
        for k in 0..=n {
            out[k] += hm * &pw[k];
        }
        pw = series_mul(&pw, sigma, n);
    }
    out
}

pub fn sigma_series(h: &FirstIntegral, v: (BigRational, BigRational), order: usize) -> Result<SigmaSeries> {
    if v.0.is_zero() && v.1.is_zero() {
        return Err(Error::Invalid("zero direction".into()));
    }
    if order < 2 {
        return Err(Error::Invalid("σ-series order must be at least 2".into()));
    }
    let n = order + 1;
    let num = h.numerator.on_line(&v);
    let den = h.denominator.on_line(&v);
    if den[0].is_zero() {
        return Err(Error::Invalid("first integral singular at the origin along this line".into()));
    }
    let hs = series_div(&num, &den, n);
    let h2 = hs[2].clone();
    if h2.is_zero() {
        return Err(Error::Invalid("degenerate direction: quadratic part of H vanishes".into()));
    }
    let mut sigma = vec![q0(); order + 1];
    sigma[1] = int(-1);
    for k in 2..=order {
        let lhs = compose(&hs, &sigma, k + 1);
        let resid = &lhs[k + 1] - &hs[k + 1];
        sigma[k] = resid / (int(2) * &h2);
    }
    Ok(SigmaSeries { direction: v, coeffs: sigma })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "verdict", rename_all = "kebab-case")]
pub enum Verdict {
    /// The landing series agree through `λ^order`.
    CenterCertifiedToOrder { order: usize },
    /// The landing series first differ at `λ^order`, an exact disproof.
    NotCenter { order: usize },
}

impl Verdict {
    pub fn is_center(&self) -> bool {
        matches!(self, Verdict::CenterCertifiedToOrder { .. })
    }
}

pub fn direction_from_tau(tau: &BigRational) -> (BigRational, BigRational) {
    cos_sin_from_tau(tau)
}

pub fn is_piecewise_center(i: LoudSystem, j: LoudSystem, tau: &BigRational, order: usize) -> Result<Verdict> {
    if tau.is_zero() || i == j {
        return Ok(Verdict::CenterCertifiedToOrder { order });
    }
    let v = direction_from_tau(tau);
    let si = sigma_series(&first_integral(i)?, v.clone(), order)?;
    let sj = sigma_series(&first_integral(j)?, v, order)?;
    for k in 2..=order {
        if si.coeffs[k] != sj.coeffs[k] {
            return Ok(Verdict::NotCenter { order: k });
        }
    }
    Ok(Verdict::CenterCertifiedToOrder { order })
}

/// Report record for the command line.
pub fn sigma_json(s: &SigmaSeries) -> serde_json::Value {
    serde_json::json!({
        "direction": [format_rational(&s.direction.0), format_rational(&s.direction.1)],
        "coeffs": s.coeffs.iter().map(format_rational).collect::<Vec<_>>(),
    })
}
