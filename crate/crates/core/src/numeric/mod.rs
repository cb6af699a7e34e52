//! Numeric oracle: integrates the actual piecewise perturbed flow in
//! Cartesian coordinates and measures the difference function directly.

pub mod taylor;

use std::collections::BTreeMap;

use num_rational::BigRational;
use num_traits::{FromPrimitive, Signed, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analysis::ladder::designed_zeros;
use crate::analysis::Ladder;
use crate::error::{Error, Result};
use crate::expansion::DifferenceJet;
use crate::systems::{builtin_system, CaseName, LoudSystem};
use crate::trigcalc::coeff::{parse_rational, pi_rational, rational_to_f64};
use crate::trigcalc::fourier::cos_sin_from_tau;
use crate::trigcalc::{format_rational, Component, Pert, Side, Symbol};
use taylor::{integrate_to_line, Fixed256, QuadField, Real, TaylorOptions};

/// Largest starting radius accepted by [`half_return`].
pub const R_MAX: f64 = 0.5;

/// Working precision of the integrator.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Precision {
    /// `f64` with order-24 steps.
    #[default]
    Double,
    /// 256-bit fixed point with order-64 steps, for configurations whose
    /// first-order signal sits far below `f64` resolution.
    Extended,
}

/// Concrete perturbation, `ε`, line and pseudo-Hopf constant.
#[derive(Clone, Debug, PartialEq)]
pub struct NumericParams {
    /// Exact coefficient values; absent coefficients are zero.
    pub values: BTreeMap<Pert, BigRational>,
    pub eps: f64,
    pub tau: BigRational,
    /// Constant added to the second component of the minus side.
    pub b: f64,
    pub atol: f64,
    pub rtol: f64,
    pub precision: Precision,
}

impl NumericParams {
    pub fn new(tau: BigRational, eps: f64) -> Self {
        NumericParams {
            values: BTreeMap::new(),
            eps,
            tau,
            b: 0.0,
            atol: 1e-12,
            rtol: 1e-12,
            precision: Precision::Double,
        }
    }

    /// Switches to [`Precision::Extended`] with its matching tolerances.
    pub fn extended(mut self) -> Self {
        let o = TaylorOptions::extended();
        self.precision = Precision::Extended;
        self.atol = o.atol;
        self.rtol = o.rtol;
        self
    }

    pub fn value(&self, p: Pert) -> f64 {
        self.values.get(&p).map_or(0.0, rational_to_f64)
    }

    /// Sets a coefficient by name, e.g. `a+10`.
    pub fn set(&mut self, name: &str, v: BigRational) -> Result<()> {
        match name.parse::<Symbol>()? {
            Symbol::Pert(p) => {
                self.values.insert(p, v);
                Ok(())
            }
            other => Err(Error::Invalid(format!("{other} is not a perturbation coefficient"))),
        }
    }

    /// Like [`NumericParams::set`] with the exact binary value of `v`.
    pub fn set_f64(&mut self, name: &str, v: f64) -> Result<()> {
        let q = BigRational::from_f64(v).ok_or_else(|| Error::Invalid(format!("{v} is not finite")))?;
        self.set(name, q)
    }

    fn options(&self) -> TaylorOptions {
        let base = match self.precision {
            Precision::Double => TaylorOptions::default(),
            Precision::Extended => TaylorOptions::extended(),
        };
        TaylorOptions { atol: self.atol, rtol: self.rtol, ..base }
    }

    /// `(cos α, sin α)` of the switching line.
    pub fn direction(&self) -> [f64; 2] {
        let (c, s) = cos_sin_from_tau(&self.tau);
        [rational_to_f64(&c), rational_to_f64(&s)]
    }
}

/// A coefficient in a parameter file: a JSON number or an exact string
/// such as `"-3/7"`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ParamValue {
    Number(f64),
    Exact(String),
}

impl ParamValue {
    pub fn to_rational(&self) -> Result<BigRational> {
        match self {
            ParamValue::Number(v) => {
                BigRational::from_f64(*v).ok_or_else(|| Error::Invalid(format!("{v} is not finite")))
            }
            ParamValue::Exact(s) => parse_rational(s),
        }
    }
}

/// Serialized form of [`NumericParams`]; `τ` and the coefficients stay exact.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ParamsFile {
    pub tau: String,
    pub eps: f64,
    #[serde(default)]
    pub b: f64,
    #[serde(default)]
    pub precision: Precision,
    #[serde(default)]
    pub values: BTreeMap<String, ParamValue>,
}

impl ParamsFile {
    pub fn into_params(self) -> Result<NumericParams> {
        let tau = crate::systems::parse_tau(&self.tau)?;
        let mut p = NumericParams::new(tau, self.eps);
        if self.precision == Precision::Extended {
            p = p.extended();
        }
        p.b = self.b;
        for (k, v) in &self.values {
            p.set(k, v.to_rational()?)?;
        }
        Ok(p)
    }

    pub fn from_params(p: &NumericParams) -> Self {
        ParamsFile {
            tau: format_rational(&p.tau),
            eps: p.eps,
            b: p.b,
            precision: p.precision,
            values: p
                .values
                .iter()
                .map(|(k, v)| (Symbol::Pert(*k).to_string(), ParamValue::Exact(format_rational(v))))
                .collect(),
        }
    }
}

/// The Cartesian field of one side with `ε` and `b` applied.
pub fn side_field<R: Real>(sys: LoudSystem, side: Side, p: &NumericParams) -> QuadField<R> {
    let q = builtin_system(sys);
    let c = |v: f64| R::from_f64(v);
    let mut f = QuadField {
        x: [c(0.0), c(0.0), c(-1.0), c(0.0), c(0.0), c(0.0)],
        y: [c(0.0), c(1.0), c(0.0), c(0.0), c(0.0), c(0.0)],
    };
    for i in 0..3 {
        f.x[3 + i] = R::from_rational(&q.p[i]);
        f.y[3 + i] = R::from_rational(&q.q[i]);
    }
    let slot = |eta: (u8, u8)| match eta {
        (1, 0) => 1,
        (0, 1) => 2,
        (2, 0) => 3,
        (1, 1) => 4,
        (0, 2) => 5,
        _ => unreachable!("quadratic perturbation"),
    };
    let eps = R::from_f64(p.eps);
    for pert in Pert::side_symbols(side) {
        let Some(v) = p.values.get(&pert) else { continue };
        let v = eps.clone() * R::from_rational(v);
        let k = slot(pert.eta());
        match pert.comp {
            Component::A => f.x[k] = f.x[k].clone() + v,
            Component::B => f.y[k] = f.y[k].clone() + v,
        }
    }
    if side == Side::Minus {
        f.y[0] = f.y[0].clone() + R::from_f64(p.b);
    }
    f
}

/// Landing of one half-turn.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HalfReturn {
    /// Signed radius along the line direction; negative on the opposite ray.
    pub landing: f64,
    pub time: f64,
    pub point: [f64; 2],
    /// Event-function derivative along the flow at the landing.
    pub normal_speed: f64,
}

/// Minimum `|d(n·p)/dt|` accepted as a transversal crossing.
pub const TRANSVERSAL_MIN: f64 = 1e-8;

fn half_return_in<R: Real>(name: CaseName, p: &NumericParams, r: f64, side: Side) -> Result<(HalfReturn, R)> {
    if !(r > 0.0 && r < R_MAX) {
        return Err(Error::Invalid(format!("starting radius {r} outside (0, {R_MAX})")));
    }
    let (c, s) = cos_sin_from_tau(&p.tau);
    let (c, s) = (R::from_rational(&c), R::from_rational(&s));
    let n = [-s.clone(), c.clone()];
    let (sys, dir, sign) = match side {
        Side::Plus => (name.plus, 1.0, 1.0),
        Side::Minus => (name.minus, -1.0, -1.0),
    };
    let f = side_field::<R>(sys, side, p);
    let rr = R::from_f64(r);
    let start = [rr.clone() * c.clone(), rr * s.clone()];
    let hit = integrate_to_line(&f, &start, dir, &n, sign, &p.options())?;
    if hit.normal_speed.abs() < TRANSVERSAL_MIN {
        return Err(Error::Integration(format!("tangential landing (normal speed {:.3e})", hit.normal_speed)));
    }
    let [px, py] = hit.point;
    let landing = px.clone() * c + py.clone() * s;
    if landing >= R::zero() {
        return Err(Error::Integration("trajectory returned to the starting ray".into()));
    }
    let out = HalfReturn {
        landing: landing.to_f64(),
        time: hit.time,
        point: [px.to_f64(), py.to_f64()],
        normal_speed: hit.normal_speed,
    };
    Ok((out, landing))
}

/// Follows the trajectory from signed radius `r` through one half-plane:
/// forward in time on the plus side, backward on the minus side.
pub fn half_return(name: CaseName, p: &NumericParams, r: f64, side: Side) -> Result<HalfReturn> {
    match p.precision {
        Precision::Double => half_return_in::<f64>(name, p, r, side).map(|h| h.0),
        Precision::Extended => half_return_in::<Fixed256>(name, p, r, side).map(|h| h.0),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DisplacementSample {
    pub r: f64,
    /// `Δ(r, ε)`: plus landing distance minus minus landing distance,
    /// formed in the working precision.
    pub delta: f64,
    pub plus: HalfReturn,
    pub minus: HalfReturn,
}

fn displacement_in<R: Real>(name: CaseName, p: &NumericParams, r: f64) -> Result<DisplacementSample> {
    let (plus, lp) = half_return_in::<R>(name, p, r, Side::Plus)?;
    let (minus, lm) = half_return_in::<R>(name, p, r, Side::Minus)?;
    Ok(DisplacementSample { r, delta: (lm - lp).to_f64(), plus, minus })
}

pub fn displacement(name: CaseName, p: &NumericParams, r: f64) -> Result<DisplacementSample> {
    match p.precision {
        Precision::Double => displacement_in::<f64>(name, p, r),
        Precision::Extended => displacement_in::<Fixed256>(name, p, r),
    }
}

/// `|Δ(r, 0)|`, which vanishes for a center.
pub fn center_closure(name: CaseName, tau: &BigRational, r: f64) -> Result<f64> {
    let p = NumericParams::new(tau.clone(), 0.0);
    let d = displacement(name, &p, r)?;
    Ok(d.delta.abs())
}

/// Bracketed sign change of `Δ`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CycleBracket {
    pub lo: f64,
    pub hi: f64,
    pub root: f64,
}

/// `n` points from `lo` to `hi`, evenly spaced (or geometrically if `log`).
pub fn grid(lo: f64, hi: f64, n: usize, log: bool) -> Vec<f64> {
    let n = n.max(2);
    (0..n)
        .map(|i| {
            let t = i as f64 / (n - 1) as f64;
            if log {
                lo * (hi / lo).powf(t)
            } else {
                lo + (hi - lo) * t
            }
        })
        .collect()
}

/// Samples `Δ` on the grid, brackets every sign change and refines it by
/// bisection. Samples where integration fails are skipped and counted.
pub fn locate_cycles(name: CaseName, p: &NumericParams, r_grid: &[f64]) -> Result<(Vec<CycleBracket>, usize)> {
    let samples: Vec<Option<f64>> =
        r_grid.par_iter().map(|&r| displacement(name, p, r).ok().map(|d| d.delta)).collect();
    let skipped = samples.iter().filter(|s| s.is_none()).count();
    let pts: Vec<(f64, f64)> = r_grid.iter().zip(&samples).filter_map(|(&r, s)| s.map(|d| (r, d))).collect();
    let mut out = Vec::new();
    for w in pts.windows(2) {
        let ((a, fa), (b, fb)) = (w[0], w[1]);
        if fa == 0.0 {
            out.push(CycleBracket { lo: a, hi: a, root: a });
            continue;
        }
        if fa.signum() == fb.signum() {
            continue;
        }
        let (mut lo, mut hi, mut flo) = (a, b, fa);
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            let fm = displacement(name, p, mid)?.delta;
            if fm == 0.0 {
                lo = mid;
                hi = mid;
                break;
            }
            if fm.signum() == flo.signum() {
                lo = mid;
                flo = fm;
            } else {
                hi = mid;
            }
            if hi - lo <= 1e-13 * hi {
                break;
            }
        }
        out.push(CycleBracket { lo: a, hi: b, root: 0.5 * (lo + hi) });
    }
    Ok((out, skipped))
}

/// `(ψ_1(r), ψ_2(r))` of a jet at concrete coefficient values, evaluated
/// exactly (with a 100-digit rational `π`) and then rounded.
pub fn eval_jet(jet: &DifferenceJet, values: &BTreeMap<Pert, BigRational>, r: f64) -> (f64, f64) {
    let r = BigRational::from_f64(r).expect("finite radius");
    let (a, b) = eval_jet_exact(jet, values, &r);
    (rational_to_f64(&a), rational_to_f64(&b))
}

pub fn eval_jet_exact(
    jet: &DifferenceJet,
    values: &BTreeMap<Pert, BigRational>,
    r: &BigRational,
) -> (BigRational, BigRational) {
    let pi = pi_rational();
    let zero = || BigRational::from_integer(0.into());
    let val = |s: Symbol| match s {
        Symbol::Pert(p) => values.get(&p).cloned().unwrap_or_else(zero),
        _ => zero(),
    };
    let row = |i: usize| -> BigRational {
        if i > jet.order {
            return zero();
        }
        (1..=jet.n)
            .map(|j| jet.psi[i][j].eval_exact(|c| c.eval_rational(&pi), val) * num_traits::pow(r.clone(), j))
            .sum()
    };
    (row(1), row(2))
}

/// Prediction `ε ψ_1(r) + (ε²/2) ψ_2(r)` of the difference function.
pub fn predicted_delta(jet: &DifferenceJet, p: &NumericParams, r: f64) -> f64 {
    let (a, b) = eval_jet(jet, &p.values, r);
    p.eps * a + 0.5 * p.eps * p.eps * b
}

/// Result of one pseudo-Hopf run.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PseudoHopfReport {
    pub system: String,
    pub b: f64,
    pub base_zeros: Vec<CycleBracket>,
    pub zeros: Vec<CycleBracket>,
    /// Zeros present with `b` that have no counterpart at `b = 0`.
    pub extra: Vec<CycleBracket>,
    /// `−1` stable, `+1` unstable, `0` undecided (at `b = 0`).
    pub origin: f64,
    pub sliding: Option<Sliding>,
    pub skipped: usize,
}

/// Largest `|b|` accepted by [`pseudo_hopf_demo`].
pub const B_MAX: f64 = 1e-3;

/// Adds `b` to the minus side and compares displacement zeros against `b = 0`.
pub fn pseudo_hopf_demo(name: CaseName, base: &NumericParams, b: f64, r_grid: &[f64]) -> Result<PseudoHopfReport> {
    if b.abs() > B_MAX {
        return Err(Error::Invalid(format!("|b| = {} exceeds {B_MAX}; the cycle would leave the validated neighborhood", b.abs())));
    }
    let mut p0 = base.clone();
    p0.b = 0.0;
    let (base_zeros, _) = locate_cycles(name, &p0, r_grid)?;
    let mut pb = base.clone();
    pb.b = b;
    let (zeros, skipped) = locate_cycles(name, &pb, r_grid)?;
    let near = |z: &CycleBracket| base_zeros.iter().any(|w| (w.root - z.root).abs() <= 0.05 * w.root.max(z.root));
    let extra = zeros.iter().filter(|z| !near(z)).copied().collect();
    let origin = origin_stability(name, base)?;
    Ok(PseudoHopfReport {
        system: name.to_string(),
        b,
        base_zeros,
        zeros,
        extra,
        origin,
        sliding: sliding_segment(name, &pb),
        skipped,
    })
}

/// Stability of a sliding segment.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SlidingKind {
    /// Both fields point toward the line.
    Attracting,
    /// Both fields point away from the line.
    Repelling,
}

/// Sliding segment `[t_lo, t_hi]` along the line direction.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Sliding {
    pub lo: f64,
    pub hi: f64,
    pub kind: SlidingKind,
}

/// Points of the line where the two normal components have opposite sign,
/// scanned on `|t| ≤ 10 |b|` (or `|t| ≤ 10⁻³` when `b = 0`).
pub fn sliding_segment(name: CaseName, p: &NumericParams) -> Option<Sliding> {
    let [c, s] = p.direction();
    let n = [-s, c];
    let fp = side_field::<f64>(name.plus, Side::Plus, p);
    let fm = side_field::<f64>(name.minus, Side::Minus, p);
    let normal = |f: &QuadField, t: f64| {
        let v = f.eval(&[t * c, t * s]);
        n[0] * v[0] + n[1] * v[1]
    };
    let span = if p.b == 0.0 { 1e-3 } else { 10.0 * p.b.abs() };
    let hits: Vec<f64> =
        grid(-span, span, 20001, false).into_iter().filter(|&t| normal(&fp, t) * normal(&fm, t) < 0.0).collect();
    let (lo, hi) = (*hits.first()?, *hits.last()?);
    let mid = 0.5 * (lo + hi);
    let kind = if normal(&fp, mid) < 0.0 { SlidingKind::Attracting } else { SlidingKind::Repelling };
    Some(Sliding { lo, hi, kind })
}

/// Sign of `Δ` at small amplitude with `b = 0`: negative for a stable
/// origin, positive for an unstable one, zero when undecided.
pub fn origin_stability(name: CaseName, p: &NumericParams) -> Result<f64> {
    let mut q = p.clone();
    q.b = 0.0;
    let d: Vec<f64> =
        [1e-3, 2e-3, 4e-3].iter().map(|&r| displacement(name, &q, r).map(|d| d.delta)).collect::<Result<_>>()?;
    let s = d[0].signum();
    Ok(if d.iter().all(|v| v.signum() == s && v.abs() > 1e-14) { s } else { 0.0 })
}

/// Outcome of placing first-order zeros by construction and looking for
/// them in the integrated flow.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DesignedZeroCheck {
    pub system: String,
    pub eps: f64,
    pub designed: Vec<f64>,
    pub located: Vec<CycleBracket>,
    /// Designed zeros with a located zero within 5 % relative distance.
    pub matched: usize,
    pub skipped: usize,
}

/// Places `free − 1` zeros of the truncated `ψ_1` at `r0 · q^k`, scales
/// the coefficients so the largest is 1 and searches `Δ` at extended
/// precision on a logarithmic grid around them.
pub fn designed_zero_check(
    ladder: &Ladder,
    r0: &BigRational,
    q: &BigRational,
    eps: f64,
    points: usize,
) -> Result<DesignedZeroCheck> {
    let d = designed_zeros(ladder, r0, q)?;
    let mut values = ladder.realize(&d.alphas, &pi_rational());
    let largest = values.values().map(|v| v.abs()).max().filter(|m| !m.is_zero());
    let largest = largest.ok_or_else(|| Error::Structural("designed configuration is zero".into()))?;
    for v in values.values_mut() {
        *v = &*v / &largest;
    }
    let designed: Vec<f64> = d.zeros.iter().map(rational_to_f64).collect();
    let lo = designed.iter().copied().fold(f64::INFINITY, f64::min) * 0.4;
    let hi = (designed.iter().copied().fold(0.0, f64::max) * 1.5).min(0.9 * R_MAX);
    let mut p = NumericParams::new(ladder.tau.clone(), eps).extended();
    p.values = values;
    let (located, skipped) = locate_cycles(ladder.name, &p, &grid(lo, hi, points, true))?;
    let matched = designed.iter().filter(|&&z| located.iter().any(|c| (c.root - z).abs() <= 0.05 * z)).count();
    Ok(DesignedZeroCheck { system: ladder.name.to_string(), eps, designed, located, matched, skipped })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::trigcalc::{int, rat};

    #[test]
    fn unperturbed_center_closes() {
        for name in CaseName::table_cases() {
            for r in [0.02, 0.05, 0.1] {
                let d = center_closure(name, &rat(1, 2), r).unwrap();
                assert!(d < 1e-10, "{name} r={r}: {d}");
            }
        }
    }

    #[test]
    fn params_round_trip() {
        let mut p = NumericParams::new(rat(1, 3), 1e-4);
        p.set("a+10", rat(1, 2)).unwrap();
        p.set("b-02", rat(-1, 3)).unwrap();
        assert!(p.set("alpha3", rat(1, 1)).is_err());
        let json = serde_json::to_string(&ParamsFile::from_params(&p)).unwrap();
        assert!(json.contains("\"-1/3\""), "{json}");
        let file: ParamsFile = serde_json::from_str(r#"{"tau": "1/3", "eps": 1e-4, "values": {"a+10": 0.5, "b-02": "-1/3"}}"#).unwrap();
        assert_eq!(file.into_params().unwrap(), p);
        let back = ParamsFile::from_params(&p).into_params().unwrap();
        assert_eq!(back, p);
    }

    #[test]
    fn radius_outside_range_is_rejected() {
        let p = NumericParams::new(int(0), 0.0);
        assert!(half_return(CaseName::S1S2, &p, 0.7, Side::Plus).is_err());
        assert!(half_return(CaseName::S1S2, &p, -0.1, Side::Plus).is_err());
    }

    #[test]
    fn sliding_segment_appears_with_b() {
        let mut p = NumericParams::new(int(0), 0.0);
        let name = CaseName::S1S2;
        assert!(sliding_segment(name, &p).is_none());
        p.b = 1e-3;
        let s = sliding_segment(name, &p).unwrap();
        // Y⁺ = x and Y⁻ = x + b have opposite signs on (−b, 0).
        assert!((s.lo + 1e-3).abs() < 2e-6 && s.hi.abs() < 2e-6, "{s:?}");
        assert_eq!(s.kind, SlidingKind::Attracting);
        p.b = -1e-6;
        let s = sliding_segment(name, &p).unwrap();
        assert!(s.lo > 0.0 && (s.hi - 1e-6).abs() < 2e-9, "{s:?}");
        assert_eq!(s.kind, SlidingKind::Repelling);
    }
}
