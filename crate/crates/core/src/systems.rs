//! The quadratic isochronous centers, their quadratic perturbations, and the
//! polar data `(f0, g0, f1, f2, l1, l2)` of each half of a piecewise center.
//!
//! For a field `ẋ = −y + P2 + εP1`, `ẏ = x + Q2 + εQ1` written in polar
//! coordinates `x = r cos θ`, `y = r sin θ`, the orbit equation is
//!
//! ```text
//! dr/dθ = (r² A + ε r u) / (1 + r B + ε w)
//! A = cP2(c,s) + sQ2(c,s),   B = cQ2(c,s) − sP2(c,s)
//! r u = (xP1 + yQ1)/r,       w = (xQ1 − yP1)/r²
//! ```
//!
//! and expanding in ε gives `F0 = r² f0 / (1 + r g0)` with `f0 = A`,
//! `g0 = B`, `F1 = f1 / (1 + r g0)²` and `F2 = f2 / (1 + r g0)³` with
//! `f1 = r u (1 + rB) − r² A w` and `f2 = r² A w² − r u w (1 + rB)`.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num_rational::BigRational;

use crate::centercheck;
use crate::error::{Error, Result};
use crate::trigcalc::coeff::{int, parse_rational, q0, rat};
use crate::trigcalc::{Basis, Coeff, Component, ParamPoly, Pert, PiPoly, Side, Symbol, ThetaFourierPoly, Trig};

pub type RatFourier = ThetaFourierPoly<BigRational>;
pub type ParamFourier = ThetaFourierPoly<ParamPoly>;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum LoudSystem {
    S1,
    S2,
    S3,
    S4,
}

impl LoudSystem {
    pub const ALL: [LoudSystem; 4] = [LoudSystem::S1, LoudSystem::S2, LoudSystem::S3, LoudSystem::S4];

    pub fn index(self) -> usize {
        self as usize + 1
    }

    pub fn from_index(i: usize) -> Result<Self> {
        Self::ALL
            .get(i.wrapping_sub(1))
            .copied()
            .ok_or_else(|| Error::UnknownSystem(format!("s{i}")))
    }
}

impl fmt::Display for LoudSystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "S{}", self.index())
    }
}

impl FromStr for LoudSystem {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "s1" => Ok(LoudSystem::S1),
            "s2" => Ok(LoudSystem::S2),
            "s3" => Ok(LoudSystem::S3),
            "s4" => Ok(LoudSystem::S4),
            _ => Err(Error::UnknownSystem(s.to_string())),
        }
    }
}

/// A pair of halves: the same system on both sides or a mixed combination.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CaseName {
    pub plus: LoudSystem,
    pub minus: LoudSystem,
}

impl CaseName {
    pub const fn smooth(s: LoudSystem) -> Self {
        CaseName { plus: s, minus: s }
    }

    pub const S1S2: CaseName = CaseName { plus: LoudSystem::S1, minus: LoudSystem::S2 };

    /// The five cases of the summary table, in table order.
    pub fn table_cases() -> [CaseName; 5] {
        [
            CaseName::smooth(LoudSystem::S1),
            CaseName::smooth(LoudSystem::S2),
            CaseName::smooth(LoudSystem::S3),
            CaseName::smooth(LoudSystem::S4),
            CaseName::S1S2,
        ]
    }

    /// Registry key such as `s4` or `s1s2`.
    pub fn key(&self) -> String {
        if self.plus == self.minus {
            format!("s{}", self.plus.index())
        } else {
            format!("s{}s{}", self.plus.index(), self.minus.index())
        }
    }
}

impl fmt::Display for CaseName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.plus == self.minus {
            write!(f, "{}", self.plus)
        } else {
            write!(f, "{}&{}", self.plus, self.minus)
        }
    }
}

impl FromStr for CaseName {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let t = s.to_ascii_lowercase().replace('&', "");
        match t.len() {
            2 => Ok(CaseName::smooth(t.parse()?)),
            4 => Ok(CaseName { plus: t[..2].parse()?, minus: t[2..].parse()? }),
            _ => Err(Error::UnknownSystem(s.to_string())),
        }
    }
}

/// Parses the line parameter `τ` as an exact fraction in `[−1, 1)`.
pub fn parse_tau(s: &str) -> Result<BigRational> {
    let t = parse_rational(s)?;
    check_tau(&t)?;
    Ok(t)
}

pub fn check_tau(t: &BigRational) -> Result<()> {
    if *t < int(-1) || *t >= int(1) {
        return Err(Error::Invalid(format!("τ = {t} outside [-1, 1)")));
    }
    Ok(())
}

/// `ẋ = −y + Σ p_η x^η₁ y^η₂`, `ẏ = x + Σ q_η x^η₁ y^η₂` with `|η| = 2`.
///
/// Coefficients are indexed by the monomials `x², xy, y²`.
#[derive(Clone, Debug, PartialEq)]
pub struct PlanarQuadratic {
    pub p: [BigRational; 3],
    pub q: [BigRational; 3],
}

const QUAD: [(u32, u32); 3] = [(2, 0), (1, 1), (0, 2)];

impl PlanarQuadratic {
    pub fn eval(&self, x: f64, y: f64) -> (f64, f64) {
        let m = [x * x, x * y, y * y];
        let dot = |c: &[BigRational; 3]| -> f64 {
            c.iter().zip(m).map(|(a, v)| crate::trigcalc::coeff::rational_to_f64(a) * v).sum()
        };
        (-y + dot(&self.p), x + dot(&self.q))
    }

    /// `(A, B)` in the harmonic basis.
    fn polar_ab(&self) -> (RatFourier, RatFourier) {
        // A = c·P2 + s·Q2, B = c·Q2 − s·P2 as cos^m sin^n combinations
        let mut a = BTreeMap::new();
        let mut b = BTreeMap::new();
        for (i, &(e1, e2)) in QUAD.iter().enumerate() {
            add_pb(&mut a, (e1 + 1, e2), &self.p[i]);
            add_pb(&mut a, (e1, e2 + 1), &self.q[i]);
            add_pb(&mut b, (e1 + 1, e2), &self.q[i]);
            add_pb(&mut b, (e1, e2 + 1), &-&self.p[i]);
        }
        (RatFourier::from_power_basis(&a), RatFourier::from_power_basis(&b))
    }
}

fn add_pb(m: &mut BTreeMap<(u32, u32), BigRational>, key: (u32, u32), v: &BigRational) {
    let e = m.entry(key).or_insert_with(q0);
    *e += v;
}

pub fn builtin_system(s: LoudSystem) -> PlanarQuadratic {
    let z = q0;
    match s {
        LoudSystem::S1 => PlanarQuadratic { p: [int(1), z(), int(-1)], q: [z(), int(2), z()] },
        LoudSystem::S2 => PlanarQuadratic { p: [int(1), z(), z()], q: [z(), int(1), z()] },
        LoudSystem::S3 => PlanarQuadratic { p: [rat(-4, 3), z(), z()], q: [z(), rat(-16, 3), z()] },
        LoudSystem::S4 => PlanarQuadratic { p: [rat(16, 3), z(), rat(-4, 3)], q: [z(), rat(8, 3), z()] },
    }
}

/// Symbolic quadratic perturbation of one side without constant terms.
#[derive(Clone, Debug, PartialEq)]
pub struct Perturbation {
    /// Terms of `P1` as (coefficient symbol, exponents of x and y).
    pub p1: Vec<(Symbol, (u8, u8))>,
    /// Terms of `Q1`.
    pub q1: Vec<(Symbol, (u8, u8))>,
}

pub fn perturbation_template(side: Side, degree: u32) -> Result<Perturbation> {
    if degree != 2 {
        return Err(Error::Invalid(format!("perturbation degree {degree} unsupported (only 2)")));
    }
    let part = |comp| {
        crate::trigcalc::symbol::ETAS
            .iter()
            .map(|&eta| (Symbol::pert(side, comp, eta), eta))
            .collect::<Vec<_>>()
    };
    Ok(Perturbation { p1: part(Component::A), q1: part(Component::B) })
}

/// One perturbation coefficient in polar form: its contribution to `u` and
/// `w` is `p · r^degree · (U, W)`.
#[derive(Clone, Debug, PartialEq)]
pub struct PertPolar {
    pub symbol: Pert,
    pub degree: u32,
    pub u: RatFourier,
    pub w: RatFourier,
}

/// Polar data of one half of a piecewise center.
#[derive(Clone, Debug, PartialEq)]
pub struct HalfSystemPolar {
    pub side: Side,
    pub system: LoudSystem,
    pub f0: RatFourier,
    pub g0: RatFourier,
    /// The ten coefficients of this side in local-index order.
    pub pert: Vec<PertPolar>,
    /// `f1` by power of `r` (index 0 is the `r⁰` coefficient).
    pub f1: Vec<ParamFourier>,
    /// `f2` by power of `r`.
    pub f2: Vec<ParamFourier>,
    pub l1: u32,
    pub l2: u32,
}

fn param_fourier(t: &RatFourier, p: &ParamPoly) -> ParamFourier {
    ParamFourier::from_terms(t.terms().map(|(b, c)| (*b, p.scale(&PiPoly::constant(c.clone())))))
}

fn add_at(v: &mut Vec<ParamFourier>, k: usize, t: &ParamFourier) {
    while v.len() <= k {
        v.push(ParamFourier::zero());
    }
    v[k] = v[k].add(t);
}

pub fn to_polar(v: &PlanarQuadratic, system: LoudSystem, side: Side) -> HalfSystemPolar {
    let (a, b) = v.polar_ab();
    let template = perturbation_template(side, 2).expect("degree 2");
    let mut pert = Vec::with_capacity(10);
    for (comp_terms, is_b) in [(&template.p1, false), (&template.q1, true)] {
        for &(sym, (e1, e2)) in comp_terms {
            let Symbol::Pert(p) = sym else { unreachable!() };
            let (e1, e2) = (e1 as u32, e2 as u32);
            // monomial m = c^e1 s^e2; a-terms: U = c·m, W = −s·m; b-terms: U = s·m, W = c·m
            let mut u = BTreeMap::new();
            let mut w = BTreeMap::new();
            if is_b {
                u.insert((e1, e2 + 1), int(1));
                w.insert((e1 + 1, e2), int(1));
            } else {
                u.insert((e1 + 1, e2), int(1));
                w.insert((e1, e2 + 1), int(-1));
            }
            pert.push(PertPolar {
                symbol: p,
                degree: e1 + e2 - 1,
                u: RatFourier::from_power_basis(&u),
                w: RatFourier::from_power_basis(&w),
            });
        }
    }
    pert.sort_by_key(|p| p.symbol.local_index());
    let mut half = HalfSystemPolar { side, system, f0: a, g0: b, pert, f1: vec![], f2: vec![], l1: 2, l2: 3 };
    half.assemble_f1_f2();
    half
}

impl HalfSystemPolar {
    /// Rebuilds `f1` and `f2` from `f0`, `g0` and the per-coefficient data.
    fn assemble_f1_f2(&mut self) {
        let a = &self.f0;
        let b = &self.g0;
        let mut f1 = Vec::new();
        for p in &self.pert {
            let sym = ParamPoly::var(Symbol::Pert(p.symbol));
            let d = p.degree as usize;
            add_at(&mut f1, d + 1, &param_fourier(&p.u, &sym));
            let t = p.u.mul(b).sub(&a.mul(&p.w));
            add_at(&mut f1, d + 2, &param_fourier(&t, &sym));
        }
        let mut f2 = Vec::new();
        for p in &self.pert {
            for q in &self.pert {
                let pq = ParamPoly::var(Symbol::Pert(p.symbol)).mul(&ParamPoly::var(Symbol::Pert(q.symbol)));
                let d = (p.degree + q.degree) as usize;
                add_at(&mut f2, d + 2, &param_fourier(&a.mul(&p.w).mul(&q.w), &pq));
                let uw = p.u.mul(&q.w);
                add_at(&mut f2, d + 1, &param_fourier(&uw.neg(), &pq));
                add_at(&mut f2, d + 2, &param_fourier(&uw.mul(b).neg(), &pq));
            }
        }
        self.f1 = f1;
        self.f2 = f2;
    }

    /// Applies `θ ↦ θ + α` to every stored function.
    pub fn rotated(&self, tau: &BigRational) -> Result<HalfSystemPolar> {
        let mut out = self.clone();
        out.f0 = self.f0.rotate(tau)?;
        out.g0 = self.g0.rotate(tau)?;
        for p in &mut out.pert {
            p.u = p.u.rotate(tau)?;
            p.w = p.w.rotate(tau)?;
        }
        out.f1 = self.f1.iter().map(|t| t.rotate(tau)).collect::<Result<_>>()?;
        out.f2 = self.f2.iter().map(|t| t.rotate(tau)).collect::<Result<_>>()?;
        Ok(out)
    }

    /// `dr/dθ` from the stored data, truncated after `ε²`.
    pub fn reconstruct_drdtheta(&self, theta: f64, r: f64, eps: f64, val: &dyn Fn(Symbol) -> f64) -> f64 {
        let q = crate::trigcalc::coeff::rational_to_f64;
        let a = self.f0.eval_f64(theta, q);
        let b = self.g0.eval_f64(theta, q);
        let d = 1.0 + r * b;
        let series = |f: &[ParamFourier]| -> f64 {
            f.iter()
                .enumerate()
                .map(|(k, t)| {
                    r.powi(k as i32)
                        * t.eval_f64(theta, |c| c.eval_f64(|pc| pc.eval_f64(std::f64::consts::PI), val))
                })
                .sum()
        };
        r * r * a / d + eps * series(&self.f1) / d.powi(self.l1 as i32) + eps * eps * series(&self.f2) / d.powi(self.l2 as i32)
    }
}

/// Both halves, already rotated so that `θ = 0` points along the switching line.
#[derive(Clone, Debug)]
pub struct PiecewiseCenter {
    pub name: CaseName,
    pub tau: BigRational,
    pub plus: HalfSystemPolar,
    pub minus: HalfSystemPolar,
}

impl PiecewiseCenter {
    pub fn half(&self, side: Side) -> &HalfSystemPolar {
        match side {
            Side::Plus => &self.plus,
            Side::Minus => &self.minus,
        }
    }
}

/// Unrotated polar data of both halves of a case.
pub fn unrotated_halves(name: CaseName) -> (HalfSystemPolar, HalfSystemPolar) {
    (
        to_polar(&builtin_system(name.plus), name.plus, Side::Plus),
        to_polar(&builtin_system(name.minus), name.minus, Side::Minus),
    )
}

pub fn make_piecewise(name: CaseName, tau: &BigRational) -> Result<PiecewiseCenter> {
    check_tau(tau)?;
    if name.plus != name.minus {
        let verdict = centercheck::is_piecewise_center(name.plus, name.minus, tau, centercheck::DEFAULT_ORDER)?;
        if let centercheck::Verdict::NotCenter { order } = verdict {
            return Err(Error::NotCenter(format!(
                "{name} with τ = {tau}: the half-return maps differ at order {order}"
            )));
        }
    }
    let (plus, minus) = unrotated_halves(name);
    Ok(PiecewiseCenter { name, tau: tau.clone(), plus: plus.rotated(tau)?, minus: minus.rotated(tau)? })
}

/// `cos θ` and `sin θ` as basis elements, for building expected values.
pub fn cos_theta() -> RatFourier {
    RatFourier::term(Basis::new(0, 1, Trig::Cos), int(1))
}

pub fn sin_theta() -> RatFourier {
    RatFourier::term(Basis::new(0, 1, Trig::Sin), int(1))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pb(entries: &[((u32, u32), BigRational)]) -> RatFourier {
        RatFourier::from_power_basis(&entries.iter().cloned().collect())
    }

    #[test]
    fn builtin_f0_g0() {
        let s1 = to_polar(&builtin_system(LoudSystem::S1), LoudSystem::S1, Side::Plus);
        assert_eq!(s1.f0, cos_theta());
        assert_eq!(s1.g0, sin_theta());
        let s2 = to_polar(&builtin_system(LoudSystem::S2), LoudSystem::S2, Side::Minus);
        assert_eq!(s2.f0, cos_theta());
        assert!(s2.g0.is_zero());
        let s3 = to_polar(&builtin_system(LoudSystem::S3), LoudSystem::S3, Side::Plus);
        assert_eq!(s3.f0, pb(&[((3, 0), int(4)), ((1, 0), rat(-16, 3))]));
        assert_eq!(s3.g0, pb(&[((2, 1), int(-4))]));
        let s4 = to_polar(&builtin_system(LoudSystem::S4), LoudSystem::S4, Side::Plus);
        // 4 sin³θ − 8/3 sin θ
        assert_eq!(s4.g0, pb(&[((0, 3), int(4)), ((0, 1), rat(-8, 3))]));
        // (4/3) cos θ (3cos²θ + 1)
        assert_eq!(s4.f0, pb(&[((3, 0), int(4)), ((1, 0), rat(4, 3))]));
        assert_eq!((s4.l1, s4.l2), (2, 3));
    }

    #[test]
    fn template_has_no_constant_terms() {
        let t = perturbation_template(Side::Plus, 2).unwrap();
        assert_eq!(t.p1.len(), 5);
        assert!(t.p1.iter().chain(&t.q1).all(|(_, (a, b))| a + b > 0));
        assert_eq!(t.p1[0].0.to_string(), "a+10");
        assert!(perturbation_template(Side::Plus, 3).is_err());
    }

    #[test]
    fn case_names() {
        assert_eq!("s1s2".parse::<CaseName>().unwrap(), CaseName::S1S2);
        assert_eq!(CaseName::S1S2.to_string(), "S1&S2");
        assert_eq!("S4".parse::<CaseName>().unwrap().key(), "s4");
        assert!("s5".parse::<CaseName>().is_err());
    }
}
