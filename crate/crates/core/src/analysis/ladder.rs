//! Sequential independence ladder over the first-order coefficients.

use std::collections::BTreeMap;

use num_rational::BigRational;
use serde::{Deserialize, Serialize};

use super::pifrac::PiFrac;
use crate::error::{Error, Result};
use crate::expansion::DifferenceJet;
use crate::systems::CaseName;
use crate::trigcalc::coeff::{format_rational, rat};
use crate::trigcalc::{Coeff, ParamPoly, Pert, Symbol};

/// Linear form over `α_k` and unsolved perturbation coefficients.
pub type LinForm = BTreeMap<Symbol, PiFrac>;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum PivotPolicy {
    /// First solvable coefficient in canonical order.
    #[default]
    Canonical,
    /// The fixed pivot sequence used for the published ladders.
    Paper,
}

impl std::str::FromStr for PivotPolicy {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "canonical" => Ok(PivotPolicy::Canonical),
            "paper" => Ok(PivotPolicy::Paper),
            _ => Err(Error::Parse(format!("unknown pivot policy `{s}` (canonical|paper)"))),
        }
    }
}

/// Published pivot sequence for a case, if there is one.
pub fn paper_pivots(name: CaseName) -> Option<Vec<Pert>> {
    let seq: &[&str] = match (name.plus.index(), name.minus.index()) {
        (3, 3) | (4, 4) => &["a-10", "b-01", "a-11", "a-02", "b-20", "a-20", "a+11", "b+20", "b+01"],
        (1, 2) => &["a-10", "b-10", "a-11", "a-02", "b+20", "a-20", "b-20", "a+01", "a+10", "a+11"],
        _ => return None,
    };
    Some(seq.iter().map(|s| pert(s)).collect())
}

/// Parses a coefficient name such as `a+10`.
pub fn pert(s: &str) -> Pert {
    match s.parse::<Symbol>() {
        Ok(Symbol::Pert(p)) => p,
        _ => panic!("bad coefficient name {s}"),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum RowKind {
    Solved { symbol: String, alias: usize },
    Dependent { combination: Vec<(usize, PiFrac)> },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LadderRow {
    pub j: usize,
    #[serde(flatten)]
    pub kind: RowKind,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Ladder {
    pub name: CaseName,
    pub tau: BigRational,
    pub n: usize,
    pub rows: Vec<LadderRow>,
    pub free_count: usize,
    /// Every solved coefficient as a linear form in the `α`'s and the free coefficients.
    pub solutions: BTreeMap<Pert, LinForm>,
}

pub fn linear_form(p: &ParamPoly) -> Result<LinForm> {
    let mut out = LinForm::new();
    for (m, c) in p.terms() {
        match m.pairs() {
            [(s, 1)] => {
                out.insert(*s, PiFrac::from_poly(c.clone()));
            }
            _ => return Err(Error::Structural(format!("first-order coefficient has non-linear term {m}"))),
        }
    }
    Ok(out)
}

fn add_scaled(dst: &mut LinForm, src: &LinForm, f: &PiFrac) {
    for (s, c) in src {
        let v = dst.entry(*s).or_insert_with(PiFrac::zero);
        *v = v.add(&c.mul(f));
        if v.is_zero() {
            dst.remove(s);
        }
    }
}

/// Replaces every solved coefficient in `row` by its linear form.
pub fn reduce(row: &LinForm, sol: &BTreeMap<Pert, LinForm>) -> LinForm {
    let mut out = LinForm::new();
    for (s, c) in row {
        match s {
            Symbol::Pert(p) if sol.contains_key(p) => add_scaled(&mut out, &sol[p], c),
            _ => add_scaled(&mut out, &LinForm::from([(*s, PiFrac::one())]), c),
        }
    }
    out
}

impl Ladder {
    pub fn build(jet: &DifferenceJet, policy: PivotPolicy) -> Result<Ladder> {
        if jet.order < 1 {
            return Err(Error::Invalid("the ladder needs a first-order jet".into()));
        }
        let forced = match policy {
            PivotPolicy::Canonical => None,
            PivotPolicy::Paper => Some(paper_pivots(jet.name).ok_or_else(|| {
                Error::Invalid(format!("no published pivot sequence for {}", jet.name))
            })?),
        };
        let mut sol: BTreeMap<Pert, LinForm> = BTreeMap::new();
        let mut rows = Vec::new();
        let mut alias = 0;
        for j in 1..=jet.n {
            let row = reduce(&linear_form(&jet.psi[1][j])?, &sol);
            let candidates: Vec<Pert> = row
                .keys()
                .filter_map(|s| match s {
                    Symbol::Pert(p) => Some(*p),
                    _ => None,
                })
                .collect();
            if candidates.is_empty() {
                let combination = row
                    .iter()
                    .map(|(s, c)| match s {
                        Symbol::Alpha(k) => Ok((*k as usize, c.clone())),
                        _ => Err(Error::Structural(format!("unexpected symbol {s} in a dependent row"))),
                    })
                    .collect::<Result<Vec<_>>>()?;
                rows.push(LadderRow { j, kind: RowKind::Dependent { combination } });
                continue;
            }
            let pivot = match &forced {
                None => candidates[0],
                Some(seq) => {
                    let p = *seq.get(alias).ok_or_else(|| {
                        Error::Structural(format!("row {j} is solvable but the pivot sequence is exhausted"))
                    })?;
                    if !candidates.contains(&p) {
                        return Err(Error::Structural(format!(
                            "pivot {} has zero coefficient in row {j}",
                            Symbol::Pert(p)
                        )));
                    }
                    p
                }
            };
            alias += 1;
            // pivot = (α_alias − Σ_{v≠pivot} c_v v) / c_pivot
            let cp = row[&Symbol::Pert(pivot)].clone();
            let inv = cp.inv().expect("nonzero pivot");
            let mut expr = LinForm::from([(Symbol::Alpha(alias as u16), inv.clone())]);
            let neg_inv = inv.neg();
            for (s, c) in &row {
                if *s != Symbol::Pert(pivot) {
                    add_scaled(&mut expr, &LinForm::from([(*s, c.clone())]), &neg_inv);
                }
            }
            let single = BTreeMap::from([(pivot, expr.clone())]);
            for f in sol.values_mut() {
                *f = reduce(f, &single);
            }
            sol.insert(pivot, expr);
            rows.push(LadderRow { j, kind: RowKind::Solved { symbol: Symbol::Pert(pivot).to_string(), alias } });
        }
        Ok(Ladder { name: jet.name, tau: jet.tau.clone(), n: jet.n, rows, free_count: alias, solutions: sol })
    }

    /// Row aliased to `α_k`.
    pub fn alias_row(&self, k: usize) -> Option<usize> {
        self.rows.iter().find_map(|r| match &r.kind {
            RowKind::Solved { alias, .. } if *alias == k => Some(r.j),
            _ => None,
        })
    }

    pub fn row(&self, j: usize) -> Option<&LadderRow> {
        self.rows.iter().find(|r| r.j == j)
    }

    pub fn dependent_rows(&self) -> Vec<usize> {
        self.rows
            .iter()
            .filter(|r| matches!(r.kind, RowKind::Dependent { .. }))
            .map(|r| r.j)
            .collect()
    }

    pub fn pivots(&self) -> Vec<Pert> {
        self.rows
            .iter()
            .filter_map(|r| match &r.kind {
                RowKind::Solved { symbol, .. } => Some(pert(symbol)),
                _ => None,
            })
            .collect()
    }

    /// Coefficients not used as pivots, in canonical order.
    pub fn free_parameters(&self) -> Vec<Pert> {
        Pert::all().into_iter().filter(|p| !self.solutions.contains_key(p)).collect()
    }

    /// Linear form of any coefficient: its solution, or itself when free.
    pub fn form_of(&self, p: Pert) -> LinForm {
        self.solutions
            .get(&p)
            .cloned()
            .unwrap_or_else(|| LinForm::from([(Symbol::Pert(p), PiFrac::one())]))
    }

    /// Coefficient values realizing `α_l = alphas[l − 1]` with every free
    /// coefficient set to zero; `π` is replaced by the rational `pi`.
    pub fn realize(&self, alphas: &[BigRational], pi: &BigRational) -> BTreeMap<Pert, BigRational> {
        let val = |s: &Symbol| match s {
            Symbol::Alpha(k) => alphas.get(*k as usize - 1).cloned().unwrap_or_else(|| rat(0, 1)),
            _ => rat(0, 1),
        };
        self.solutions
            .iter()
            .map(|(p, f)| (*p, f.iter().map(|(s, c)| c.eval_rational(pi) * val(s)).sum()))
            .collect()
    }

    /// Human-readable rendering of a dependent row.
    pub fn render_row(&self, j: usize) -> Option<String> {
        let r = self.row(j)?;
        Some(match &r.kind {
            RowKind::Solved { alias, .. } => format!("ψ̃_{{1,{j}}} = α_{alias}"),
            RowKind::Dependent { combination } => {
                let terms: Vec<String> = combination
                    .iter()
                    .map(|(k, c)| match c.as_rational() {
                        Some(q) => format!("({}) α_{k}", format_rational(&q)),
                        None => format!("({c}) α_{k}"),
                    })
                    .collect();
                format!("ψ̃_{{1,{j}}} = {}", if terms.is_empty() { "0".into() } else { terms.join(" + ") })
            }
        })
    }
}

/// Count of limit cycles guaranteed by first order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CycleCountReport {
    pub system: String,
    pub tau: String,
    pub order: usize,
    pub free_count: usize,
    /// Simple positive zeros of the truncated difference function.
    pub simple_zeros: usize,
    pub pseudo_hopf: usize,
    pub total: usize,
}

pub fn first_order_count(l: &Ladder) -> Result<CycleCountReport> {
    if l.free_count == 0 {
        return Err(Error::Structural(format!("{}: no independent first-order coefficient", l.name)));
    }
    Ok(CycleCountReport {
        system: l.name.to_string(),
        tau: format_rational(&l.tau),
        order: 1,
        free_count: l.free_count,
        simple_zeros: l.free_count - 1,
        pseudo_hopf: 1,
        total: l.free_count,
    })
}

/// A choice of the `α`'s realizing `free_count − 1` simple positive zeros.
#[derive(Clone, Debug)]
pub struct DesignedZeros {
    pub alphas: Vec<BigRational>,
    pub zeros: Vec<BigRational>,
    /// `ψ̃_{1,j}` values for `j = 1..=n` under this choice (index 0 unused).
    pub row_values: Vec<BigRational>,
    /// Exact sign change around each zero was confirmed.
    pub verified: bool,
}

/// Prescribes zeros `ρ_i = r0 · q^i` and solves for the `α`'s with the
/// highest one fixed to 1, then checks sign changes of the truncated
/// polynomial `Σ_j ψ̃_{1,j} r^j` around every `ρ_i`.
pub fn designed_zeros(l: &Ladder, r0: &BigRational, q: &BigRational) -> Result<DesignedZeros> {
    let m = l.free_count;
    if m < 1 {
        return Err(Error::Structural("no free coefficients".into()));
    }
    let pi = crate::trigcalc::coeff::pi_rational();
    // basis: ψ̃_{1,j} = Σ_l B[j][l] α_l
    let mut basis = vec![vec![rat(0, 1); m + 1]; l.n + 1];
    for r in &l.rows {
        match &r.kind {
            RowKind::Solved { alias, .. } => basis[r.j][*alias] = rat(1, 1),
            RowKind::Dependent { combination } => {
                for (k, c) in combination {
                    basis[r.j][*k] = c.eval_rational(&pi);
                }
            }
        }
    }
    let eval_b = |lidx: usize, x: &BigRational| -> BigRational {
        let mut acc = rat(0, 1);
        let mut p = x.clone();
        for row in basis.iter().skip(1) {
            acc += &row[lidx] * &p;
            p *= x;
        }
        acc
    };
    let zeros: Vec<BigRational> = (0..m - 1)
        .map(|i| r0 * num_traits::pow(q.clone(), i))
        .collect();
    let k = m - 1;
    // solve Σ_{l<m} α_l B_l(ρ_i) = −B_m(ρ_i)
    let mut a = vec![vec![rat(0, 1); k + 1]; k];
    for (i, z) in zeros.iter().enumerate() {
        for lidx in 1..=k {
            a[i][lidx - 1] = eval_b(lidx, z);
        }
        a[i][k] = -eval_b(m, z);
    }
    let sol = solve_dense(a)?;
    let mut alphas: Vec<BigRational> = sol;
    alphas.push(rat(1, 1));
    let row_values: Vec<BigRational> = std::iter::once(rat(0, 1))
        .chain((1..=l.n).map(|j| (1..=m).map(|lidx| &basis[j][lidx] * &alphas[lidx - 1]).sum()))
        .collect();
    let p = |x: &BigRational| -> BigRational {
        let mut acc = rat(0, 1);
        let mut pw = x.clone();
        for v in row_values.iter().skip(1) {
            acc += v * &pw;
            pw *= x;
        }
        acc
    };
    let delta = rat(1, 1000);
    let verified = zeros.iter().all(|z| {
        let lo = p(&(z * (rat(1, 1) - &delta)));
        let hi = p(&(z * (rat(1, 1) + &delta)));
        num_traits::Signed::is_negative(&(lo * hi))
    });
    Ok(DesignedZeros { alphas, zeros, row_values, verified })
}

/// Gaussian elimination on an augmented `k × (k+1)` system.
pub fn solve_dense(mut a: Vec<Vec<BigRational>>) -> Result<Vec<BigRational>> {
    let k = a.len();
    for col in 0..k {
        let piv = (col..k)
            .find(|&r| !Coeff::is_zero(&a[r][col]))
            .ok_or_else(|| Error::Structural("singular linear system".into()))?;
        a.swap(col, piv);
        let inv = a[col][col].recip();
        for c in col..=k {
            a[col][c] = &a[col][c] * &inv;
        }
        for r in 0..k {
            if r != col && !Coeff::is_zero(&a[r][col]) {
                let f = a[r][col].clone();
                for c in col..=k {
                    let v = &a[col][c] * &f;
                    a[r][c] -= v;
                }
            }
        }
    }
    Ok(a.into_iter().map(|row| row[k].clone()).collect())
}
