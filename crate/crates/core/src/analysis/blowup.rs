//! Elimination of the dependent linear parts and monomial blow-ups.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::hsolve::{solve_h_system, HSolution, SolveOptions};
use super::ladder::{linear_form, Ladder, LinForm, RowKind};
use super::pifrac::PiFrac;
use crate::error::{Error, Result};
use crate::expansion::DifferenceJet;
use crate::systems::CaseName;
use crate::trigcalc::{Coeff, Monomial, ParamPoly, Pert, Poly, Symbol};

/// Polynomial over `Q(π)`.
pub type FracPoly = Poly<PiFrac>;

/// A parameter blow-up and the rows it turns into an h-system.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlowupSpec {
    pub case: String,
    /// `α_1 … α_k` set to zero after elimination.
    pub zero_alphas_upto: usize,
    /// Further `α`'s set to zero.
    pub extra_zero_alphas: Vec<usize>,
    /// Free coefficients set to zero.
    pub zeroed: Vec<String>,
    /// Symbol ↦ (coefficient-free) monomial, e.g. `alpha7 ↦ [[alpha9, 2], [gamma7, 1]]`.
    pub substitutions: Vec<(String, Vec<(String, u32)>)>,
    pub pivot: String,
    /// Rows forming the square system, each with the declared pivot power.
    pub equations: Vec<(usize, u32)>,
    /// Row that must not vanish at the solution, with its pivot power.
    pub extra: (usize, u32),
}

fn s(x: &str) -> String {
    x.to_string()
}

fn mono(pairs: &[(&str, u32)]) -> Vec<(String, u32)> {
    pairs.iter().map(|(a, e)| (s(a), *e)).collect()
}

impl BlowupSpec {
    pub fn for_case(name: CaseName) -> Result<BlowupSpec> {
        let key = (name.plus.index(), name.minus.index());
        Ok(match key {
            (4, 4) => BlowupSpec {
                case: name.to_string(),
                zero_alphas_upto: 6,
                extra_zero_alphas: vec![],
                zeroed: ["a-01", "a+01", "a+10", "a+20", "b-02", "b-10", "b-11", "b+02"].map(s).to_vec(),
                substitutions: vec![
                    (s("alpha7"), mono(&[("alpha9", 2), ("gamma7", 1)])),
                    (s("alpha8"), mono(&[("alpha9", 2), ("gamma8", 1)])),
                    (s("a+02"), mono(&[("alpha9", 1), ("z1", 1)])),
                    (s("b+10"), mono(&[("alpha9", 1), ("z2", 1)])),
                    (s("b+11"), mono(&[("alpha9", 1), ("z3", 1)])),
                ],
                pivot: s("alpha9"),
                equations: vec![(7, 2), (8, 2), (9, 2), (10, 2), (11, 2)],
                extra: (12, 1),
            },
            (3, 3) => BlowupSpec {
                case: name.to_string(),
                zero_alphas_upto: 6,
                extra_zero_alphas: vec![9],
                zeroed: ["a+01", "a+10", "a+02", "a+20", "b-02", "b-10", "b-11", "b+02", "b+10", "b+11"]
                    .map(s)
                    .to_vec(),
                substitutions: vec![
                    (s("alpha7"), mono(&[("alpha8", 2), ("gamma7", 1)])),
                    (s("a-01"), mono(&[("alpha8", 1), ("z1", 1)])),
                ],
                pivot: s("alpha8"),
                equations: vec![(7, 2), (8, 2)],
                extra: (9, 2),
            },
            (1, 2) => BlowupSpec {
                case: name.to_string(),
                zero_alphas_upto: 8,
                extra_zero_alphas: vec![],
                zeroed: ["a+02", "a+20", "b-01", "b-02", "b-11", "b+01", "b+02", "b+10"].map(s).to_vec(),
                substitutions: vec![
                    (s("alpha9"), mono(&[("alpha10", 2), ("gamma9", 1)])),
                    (s("a-01"), mono(&[("alpha10", 1), ("z1", 1)])),
                    (s("b+11"), mono(&[("alpha10", 1), ("z2", 1)])),
                ],
                pivot: s("alpha10"),
                equations: vec![(9, 2), (10, 2), (11, 2)],
                extra: (12, 1),
            },
            (2, 2) => BlowupSpec {
                case: name.to_string(),
                zero_alphas_upto: 6,
                extra_zero_alphas: vec![],
                zeroed: S2_ZEROED.map(s).to_vec(),
                substitutions: vec![
                    (s("alpha7"), mono(&[("alpha8", 2), ("gamma7", 1)])),
                    (s(S2_BLOWN[0]), mono(&[("alpha8", 1), ("z1", 1)])),
                    (s(S2_BLOWN[1]), mono(&[("alpha8", 1), ("z2", 1)])),
                ],
                pivot: s("alpha8"),
                equations: vec![(7, 2), (8, 2), (9, 2)],
                extra: (10, 1),
            },
            _ => return Err(Error::Invalid(format!("no blow-up is defined for {name}"))),
        })
    }

    fn symbol(x: &str) -> Result<Symbol> {
        x.parse()
    }

    /// Coefficients blown up as `pivot · z_k`, in `z` order.
    pub fn blown(&self) -> Vec<String> {
        self.substitutions.iter().filter(|(from, _)| !from.starts_with("alpha")).map(|(f, _)| f.clone()).collect()
    }

    /// Same shape with a different choice of blown-up coefficients; every
    /// other entry of `free` is zeroed.
    pub fn with_blown(&self, blown: &[String], free: &[String]) -> BlowupSpec {
        let mut out = self.clone();
        out.zeroed = free.iter().filter(|p| !blown.contains(p)).cloned().collect();
        out.substitutions.retain(|(from, _)| from.starts_with("alpha"));
        for (k, b) in blown.iter().enumerate() {
            out.substitutions.push((b.clone(), vec![(self.pivot.clone(), 1), (format!("z{}", k + 1), 1)]));
        }
        out
    }
}

/// Free coefficients of the S2 ladder (τ = 1/2, canonical pivots) that are
/// blown up; every other free coefficient is zeroed.
pub const S2_BLOWN: [&str; 2] = ["a+10", "b+11"];
pub const S2_ZEROED: [&str; 10] = ["a-01", "b-01", "b-02", "b-11", "a+01", "a+20", "a+02", "b+10", "b+01", "b+02"];

/// A blow-up whose h-system was solved with all certificates.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CertifiedBlowup {
    pub spec: BlowupSpec,
    pub solution: HSolution,
}

/// Tries every choice of blown-up coefficients among the ladder's free
/// coefficients, keeping the shape of `base`, in lexicographic order.
/// Returns the first `limit` certified choices.
pub fn search_blowups(
    jet: &DifferenceJet,
    ladder: &Ladder,
    base: &BlowupSpec,
    opt: &SolveOptions,
    limit: usize,
) -> Result<Vec<CertifiedBlowup>> {
    let free: Vec<String> = ladder.free_parameters().into_iter().map(|p| Symbol::Pert(p).to_string()).collect();
    let k = base.blown().len();
    let mut found = Vec::new();
    let mut pick: Vec<usize> = (0..k).collect();
    if k > free.len() {
        return Ok(found);
    }
    loop {
        let blown: Vec<String> = pick.iter().map(|&i| free[i].clone()).collect();
        let spec = base.with_blown(&blown, &free);
        if let Ok(solution) = h_system(jet, ladder, &spec).and_then(|h| solve_h_system(&h, opt)) {
            if solution.certified() {
                found.push(CertifiedBlowup { spec, solution });
                if found.len() >= limit {
                    break;
                }
            }
        }
        // Next k-combination.
        let mut i = k;
        while i > 0 && pick[i - 1] == free.len() - k + i - 1 {
            i -= 1;
        }
        if i == 0 {
            break;
        }
        pick[i - 1] += 1;
        for j in i..k {
            pick[j] = pick[j - 1] + 1;
        }
    }
    Ok(found)
}

/// Rows `Ψ̃_j` after the linear change, restricted to the surviving symbols.
#[derive(Clone, Debug)]
pub struct TransformedRows {
    /// `rows[j]` for `j = 1..=n`; index 0 unused.
    pub rows: Vec<FracPoly>,
}

fn lin_to_poly(f: &LinForm) -> FracPoly {
    FracPoly::from_terms(f.iter().map(|(s, c)| (Monomial::var(*s), c.clone())))
}

fn pi_to_frac(p: &ParamPoly) -> FracPoly {
    p.map_coeffs(|c| PiFrac::from_poly(c.clone()))
}

/// Builds `Ψ̃_j = ψ̃_{1,j} + ψ̃_{2,j}` in the ladder variables, subtracts from
/// each dependent row the combination of aliased rows that cancels its linear
/// part, and then sets the requested `α`'s and coefficients to zero.
pub fn eliminate_dependent_linear(
    jet: &DifferenceJet,
    ladder: &Ladder,
    zero_alphas: &[usize],
    zeroed: &[Pert],
) -> Result<TransformedRows> {
    if jet.order < 2 {
        return Err(Error::Invalid("elimination needs a second-order jet".into()));
    }
    let mut kill: HashMap<Symbol, FracPoly> = HashMap::new();
    for k in zero_alphas {
        kill.insert(Symbol::Alpha(*k as u16), FracPoly::zero());
    }
    for p in zeroed {
        kill.insert(Symbol::Pert(*p), FracPoly::zero());
    }
    // each original coefficient as a linear polynomial in the surviving symbols
    let mut lmap: HashMap<Symbol, FracPoly> = HashMap::new();
    for p in Pert::all() {
        lmap.insert(Symbol::Pert(p), lin_to_poly(&ladder.form_of(p)).substitute(&kill));
    }
    let n = jet.n;
    let mut quad: Vec<FracPoly> = vec![FracPoly::zero()];
    let mut lin: Vec<FracPoly> = vec![FracPoly::zero()];
    for j in 1..=n {
        quad.push(pi_to_frac(&jet.psi[2][j]).substitute(&lmap));
        let l1 = lin_to_poly(&super::ladder::reduce(&linear_form(&jet.psi[1][j])?, &ladder.solutions));
        lin.push(l1.substitute(&kill));
    }
    let mut rows = vec![FracPoly::zero(); n + 1];
    for r in &ladder.rows {
        let j = r.j;
        rows[j] = match &r.kind {
            RowKind::Solved { .. } => lin[j].add(&quad[j]),
            RowKind::Dependent { combination } => {
                let mut acc = lin[j].add(&quad[j]);
                for (k, c) in combination {
                    let jr = ladder.alias_row(*k).expect("alias exists");
                    let other = lin[jr].add(&quad[jr]);
                    acc = acc.sub(&other.scale(c));
                }
                if acc.terms().any(|(m, _)| m.degree() == 1) {
                    return Err(Error::Structural(format!("row {j} keeps a linear part after elimination")));
                }
                acc
            }
        };
    }
    Ok(TransformedRows { rows })
}

/// Lowest-order parts `h_{i,0}` of the blown-up rows.
#[derive(Clone, Debug)]
pub struct HSystem {
    pub case: String,
    pub unknowns: Vec<Symbol>,
    /// `(row, h_{row,0})` for the square system.
    pub equations: Vec<(usize, FracPoly)>,
    /// `(row, h_{row,0})` of the non-vanishing check.
    pub extra: (usize, FracPoly),
}

pub fn blowup_reduce(rows: &TransformedRows, spec: &BlowupSpec) -> Result<HSystem> {
    let pivot = BlowupSpec::symbol(&spec.pivot)?;
    let mut map: HashMap<Symbol, FracPoly> = HashMap::new();
    let mut unknowns = Vec::new();
    for (from, to) in &spec.substitutions {
        let pairs = to
            .iter()
            .map(|(x, e)| Ok((BlowupSpec::symbol(x)?, *e)))
            .collect::<Result<Vec<_>>>()?;
        for (sym, _) in &pairs {
            if *sym != pivot && !unknowns.contains(sym) {
                unknowns.push(*sym);
            }
        }
        map.insert(BlowupSpec::symbol(from)?, FracPoly::term(Monomial::from_pairs(pairs), PiFrac::one()));
    }
    let take = |j: usize, k: u32| -> Result<FracPoly> {
        let row = rows
            .rows
            .get(j)
            .ok_or_else(|| Error::Invalid(format!("row {j} outside the jet")))?;
        let b = row.substitute(&map);
        let stray: Vec<Symbol> = b.symbols().into_iter().filter(|x| *x != pivot && !unknowns.contains(x)).collect();
        if !stray.is_empty() {
            return Err(Error::Structural(format!(
                "row {j} still depends on {} after the blow-up",
                stray.iter().map(|s| s.to_string()).collect::<Vec<_>>().join(", ")
            )));
        }
        if !b.is_zero() && b.min_power(pivot) < k {
            return Err(Error::Structural(format!(
                "row {j} is not divisible by {pivot}^{k} (lowest power {})",
                b.min_power(pivot)
            )));
        }
        Ok(b.coeff_of_power(pivot, k))
    };
    let equations = spec.equations.iter().map(|&(j, k)| Ok((j, take(j, k)?))).collect::<Result<Vec<_>>>()?;
    let extra = (spec.extra.0, take(spec.extra.0, spec.extra.1)?);
    Ok(HSystem { case: spec.case.clone(), unknowns, equations, extra })
}

/// Runs elimination and blow-up for a case with its built-in spec.
pub fn h_system(jet: &DifferenceJet, ladder: &Ladder, spec: &BlowupSpec) -> Result<HSystem> {
    let mut zero_alphas: Vec<usize> = (1..=spec.zero_alphas_upto).collect();
    zero_alphas.extend(&spec.extra_zero_alphas);
    let zeroed = spec
        .zeroed
        .iter()
        .map(|x| match BlowupSpec::symbol(x)? {
            Symbol::Pert(p) => Ok(p),
            other => Err(Error::Invalid(format!("{other} is not a perturbation coefficient"))),
        })
        .collect::<Result<Vec<Pert>>>()?;
    for p in &zeroed {
        if ladder.solutions.contains_key(p) {
            return Err(Error::Structural(format!("{} is a pivot and cannot be zeroed", Symbol::Pert(*p))));
        }
    }
    let rows = eliminate_dependent_linear(jet, ladder, &zero_alphas, &zeroed)?;
    blowup_reduce(&rows, spec)
}
