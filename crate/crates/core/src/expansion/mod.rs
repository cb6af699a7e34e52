//! Expansion of the half-return maps in `r` and `ε` and of their difference.
//!
//! The displacement along the switching line is `Σ_i (ε^i / i!) Σ_j ψ_{i,j} r^j`
//! with `ψ_{i,j} = ξ⁺_{i,j}(π) − ξ⁻_{i,j}(−π)`. Both `ψ_i` and `ξ_i` are the
//! `i`-th `ε`-derivatives at `ε = 0`, so order two carries a factor 2 over the
//! Taylor coefficient the engine produces.

pub mod dense;
pub mod engine;
pub mod symbolic_tau;

use num_rational::BigRational;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::modp::{self, Fp};
use crate::systems::{CaseName, HalfSystemPolar, ParamFourier, PiecewiseCenter};
use crate::trigcalc::serial::JsonCoeff;
use crate::trigcalc::{format_rational, Coeff, Monomial, ParamPoly, PiPoly, Side, Symbol};
use dense::Dense;
use engine::{Limits, Options, PertInput, SideInput, SideResult};

/// How coefficients are computed.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Route {
    /// Word-sized prime fields followed by rational reconstruction.
    #[default]
    Modular,
    /// Exact rational arithmetic throughout.
    Exact,
}

impl std::str::FromStr for Route {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "modular" => Ok(Route::Modular),
            "exact" => Ok(Route::Exact),
            _ => Err(Error::Parse(format!("unknown route `{s}` (modular|exact)"))),
        }
    }
}

/// Coefficients `ψ_{i,j}` for `i ≤ order`, `1 ≤ j ≤ n`.
#[derive(Clone, Debug, PartialEq)]
pub struct DifferenceJet {
    pub name: CaseName,
    pub tau: BigRational,
    pub order: usize,
    pub n: usize,
    /// `psi[i][j]`; index `j = 0` is present and zero.
    pub psi: Vec<Vec<ParamPoly>>,
}

/// Schema tag of serialized jets.
pub const JET_SCHEMA: &str = "pqcycles.jet/1";

impl DifferenceJet {
    /// Structured-text document; every coefficient stays exact.
    pub fn to_json(&self) -> Value {
        let psi: Vec<Value> =
            self.psi.iter().map(|row| Value::Array(row.iter().map(JsonCoeff::to_json).collect())).collect();
        json!({
            "schema": JET_SCHEMA,
            "system": self.name.key(),
            "tau": format_rational(&self.tau),
            "order": self.order,
            "N": self.n,
            "psi": psi,
        })
    }

    pub fn from_json(v: &Value) -> Result<Self> {
        let bad = |what: &str| Error::Parse(format!("jet document: bad or missing {what}"));
        if v["schema"].as_str() != Some(JET_SCHEMA) {
            return Err(Error::Parse(format!("jet document: expected schema {JET_SCHEMA:?}, found {}", v["schema"])));
        }
        let name: CaseName = v["system"].as_str().ok_or_else(|| bad("system"))?.parse()?;
        let tau = crate::systems::parse_tau(v["tau"].as_str().ok_or_else(|| bad("tau"))?)?;
        let order = v["order"].as_u64().ok_or_else(|| bad("order"))? as usize;
        let n = v["N"].as_u64().ok_or_else(|| bad("N"))? as usize;
        let rows = v["psi"].as_array().ok_or_else(|| bad("psi"))?;
        if rows.len() != order + 1 {
            return Err(bad("psi rows"));
        }
        let mut psi = Vec::with_capacity(rows.len());
        for row in rows {
            let row = row.as_array().filter(|r| r.len() == n + 1).ok_or_else(|| bad("psi row"))?;
            psi.push(row.iter().map(ParamPoly::from_json).collect::<Result<Vec<_>>>()?);
        }
        Ok(DifferenceJet { name, tau, order, n, psi })
    }

    pub fn get(&self, i: usize, j: usize) -> Result<&ParamPoly> {
        self.psi
            .get(i)
            .and_then(|row| row.get(j))
            .ok_or_else(|| Error::Invalid(format!("ψ_{{{i},{j}}} outside the computed jet")))
    }
}

/// Full `ξ_{i,j}(θ)` for one side.
#[derive(Clone, Debug, PartialEq)]
pub struct SideJet {
    pub side: Side,
    pub order: usize,
    pub n: usize,
    /// `xi[i][j]`; index `j = 0` is present.
    pub xi: Vec<Vec<ParamFourier>>,
}

pub fn side_input<F: Coeff>(h: &HalfSystemPolar, conv: impl Fn(&BigRational) -> F) -> SideInput<F> {
    let d = |t| Dense::from_sparse(t, &conv);
    SideInput {
        side: h.side,
        a: d(&h.f0),
        b: d(&h.g0),
        pert: h
            .pert
            .iter()
            .map(|p| PertInput { degree: p.degree as usize, u: d(&p.u), w: d(&p.w) })
            .collect(),
    }
}

const PI_LEN: usize = 6;

fn flatten(r: &SideResult<Fp>, out: &mut Vec<u64>) -> Result<()> {
    let mut push = |s: &Vec<Vec<Fp>>| -> Result<()> {
        for v in s {
            if v.len() > PI_LEN && v[PI_LEN..].iter().any(|x| !x.is_zero()) {
                return Err(Error::CapExceeded("π-degree beyond storage".into()));
            }
            for i in 0..PI_LEN {
                out.push(v.get(i).map_or(0, |x| x.value()));
            }
        }
        Ok(())
    };
    push(&r.psi0)?;
    for s in &r.psi1 {
        push(s)?;
    }
    for (_, s) in &r.psi2 {
        push(s)?;
    }
    Ok(())
}

fn unflatten(template: &SideResult<Fp>, vals: &[BigRational], pos: &mut usize) -> SideResult<BigRational> {
    let mut take = |s: &Vec<Vec<Fp>>| -> Vec<Vec<BigRational>> {
        s.iter()
            .map(|_| {
                let v = vals[*pos..*pos + PI_LEN].to_vec();
                *pos += PI_LEN;
                v
            })
            .collect()
    };
    SideResult {
        psi0: take(&template.psi0),
        psi1: template.psi1.iter().map(&mut take).collect(),
        psi2: template.psi2.iter().map(|(k, s)| (*k, take(s))).collect(),
        xi0: None,
        xi1: None,
        xi2: None,
    }
}

fn pi_poly(v: &[BigRational]) -> PiPoly {
    PiPoly::new(v.to_vec())
}

fn sym(h: &HalfSystemPolar, p: usize) -> Symbol {
    Symbol::Pert(h.pert[p].symbol)
}

fn two() -> BigRational {
    BigRational::from_integer(2.into())
}

fn side_psi(h: &HalfSystemPolar, r: &SideResult<BigRational>, order: usize, n: usize) -> Vec<Vec<ParamPoly>> {
    let mut psi = vec![vec![ParamPoly::zero(); n + 1]; order + 1];
    for j in 0..=n {
        psi[0][j] = ParamPoly::constant(pi_poly(&r.psi0[j]));
    }
    if order >= 1 {
        for (p, s) in r.psi1.iter().enumerate() {
            let m = Monomial::var(sym(h, p));
            for j in 0..=n {
                psi[1][j].add_term(m.clone(), &pi_poly(&s[j]));
            }
        }
    }
    if order >= 2 {
        for ((p, q), s) in &r.psi2 {
            let m = Monomial::var(sym(h, *p)).mul(&Monomial::var(sym(h, *q)));
            for j in 0..=n {
                psi[2][j].add_term(m.clone(), &pi_poly(&s[j]).scale(&two()));
            }
        }
    }
    psi
}

fn combine(
    pc: &PiecewiseCenter,
    plus: &SideResult<BigRational>,
    minus: &SideResult<BigRational>,
    order: usize,
    n: usize,
) -> DifferenceJet {
    let a = side_psi(&pc.plus, plus, order, n);
    let b = side_psi(&pc.minus, minus, order, n);
    let psi = a
        .iter()
        .zip(&b)
        .map(|(ra, rb)| ra.iter().zip(rb).map(|(x, y)| x.sub(y)).collect())
        .collect();
    DifferenceJet { name: pc.name, tau: pc.tau.clone(), order, n, psi }
}

fn check_args(order: usize, n: usize) -> Result<()> {
    if order > 2 {
        return Err(Error::Invalid(format!("order {order} unsupported (0, 1 or 2)")));
    }
    if !(2..=40).contains(&n) {
        return Err(Error::Invalid(format!("truncation order N = {n} outside 2..=40")));
    }
    Ok(())
}

/// Computes `ψ_{i,j}` for `i ≤ order`, `j ≤ n`.
pub fn difference_jet(pc: &PiecewiseCenter, order: usize, n: usize, route: Route) -> Result<DifferenceJet> {
    check_args(order, n)?;
    let lim = Limits::new(n);
    let opt = Options { order, full: false };
    let (plus, minus) = match route {
        Route::Exact => {
            let run = |h: &HalfSystemPolar| engine::run_side(&side_input(h, BigRational::clone), &lim, &opt);
            (run(&pc.plus)?, run(&pc.minus)?)
        }
        Route::Modular => {
            let shape = std::cell::RefCell::new(None);
            let compute = |p: u64| -> Result<Vec<u64>> {
                modp::with_modulus(p, || {
                    let mut flat = Vec::new();
                    let mut shapes = Vec::new();
                    for h in [&pc.plus, &pc.minus] {
                        let r = engine::run_side(&side_input(h, Fp::from_rational), &lim, &opt)?;
                        flatten(&r, &mut flat)?;
                        shapes.push(r);
                    }
                    shape.borrow_mut().get_or_insert(shapes);
                    Ok(flat)
                })
            };
            let vals = modp::reconstruct_adaptive(4, compute)?;
            let shapes = shape.into_inner().expect("computed at least once");
            let mut pos = 0;
            let plus = unflatten(&shapes[0], &vals, &mut pos);
            let minus = unflatten(&shapes[1], &vals, &mut pos);
            (plus, minus)
        }
    };
    Ok(combine(pc, &plus, &minus, order, n))
}

/// Full `ξ_{i,j}(θ)` of one side in exact arithmetic.
pub fn side_jet(h: &HalfSystemPolar, order: usize, n: usize) -> Result<SideJet> {
    check_args(order, n)?;
    let lim = Limits::new(n);
    let r = engine::run_side(&side_input(h, BigRational::clone), &lim, &Options { order, full: true })?;
    let lift = |d: &Dense<BigRational>, m: &ParamPoly| -> ParamFourier {
        d.to_sparse(|c| m.scale(&PiPoly::constant(c.clone())))
    };
    let one = ParamPoly::constant(PiPoly::constant(crate::trigcalc::coeff::q1()));
    let mut xi = vec![vec![ParamFourier::zero(); n + 1]; order + 1];
    for (j, d) in r.xi0.as_ref().expect("full").iter().enumerate() {
        xi[0][j] = lift(d, &one);
    }
    if order >= 1 {
        for (p, s) in r.xi1.as_ref().expect("full").iter().enumerate() {
            let m = ParamPoly::var(sym(h, p));
            for (j, d) in s.iter().enumerate() {
                xi[1][j] = xi[1][j].add(&lift(d, &m));
            }
        }
    }
    if order >= 2 {
        for (((p, q), _), s) in r.psi2.iter().zip(r.xi2.as_ref().expect("full")) {
            let m = ParamPoly::var(sym(h, *p)).mul(&ParamPoly::var(sym(h, *q))).scale(&PiPoly::constant(two()));
            for (j, d) in s.iter().enumerate() {
                xi[2][j] = xi[2][j].add(&lift(d, &m));
            }
        }
    }
    Ok(SideJet { side: h.side, order, n, xi })
}
