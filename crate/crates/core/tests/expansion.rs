//! Cross-checks of the expansion engine: the two arithmetic routes,
//! symbolic against concrete τ, serialization, and the integrated flow.

use pqcycles::analysis::ladder::RowKind;
use pqcycles::analysis::{Ladder, PivotPolicy};
use pqcycles::expansion::symbolic_tau::difference_symbolic_tau;
use pqcycles::expansion::{difference_jet, DifferenceJet, Route};
use pqcycles::numeric::{displacement, eval_jet, NumericParams};
use pqcycles::systems::{make_piecewise, CaseName};
use pqcycles::trigcalc::rat;

fn case(s: &str) -> CaseName {
    s.parse().unwrap()
}

fn jet(name: &str, tau: (i64, i64), order: usize, n: usize, route: Route) -> DifferenceJet {
    let pc = make_piecewise(case(name), &rat(tau.0, tau.1)).unwrap();
    difference_jet(&pc, order, n, route).unwrap()
}

#[test]
fn modular_and_exact_routes_agree() {
    for name in ["s2", "s1s2"] {
        let m = jet(name, (1, 2), 2, 6, Route::Modular);
        let e = jet(name, (1, 2), 2, 6, Route::Exact);
        assert_eq!(m, e, "{name}");
    }
}

#[test]
fn json_round_trip_is_exact() {
    let j = jet("s4", (-1, 3), 2, 7, Route::Modular);
    let text = serde_json::to_string(&j.to_json()).unwrap();
    let back = DifferenceJet::from_json(&serde_json::from_str(&text).unwrap()).unwrap();
    assert_eq!(back, j);
}

#[test]
fn corrupted_jet_documents_are_rejected() {
    let mut v = jet("s1", (1, 2), 1, 3, Route::Modular).to_json();
    v["schema"] = "something-else".into();
    assert!(DifferenceJet::from_json(&v).is_err());
    let mut v = jet("s1", (1, 2), 1, 3, Route::Modular).to_json();
    v["N"] = 9.into();
    assert!(DifferenceJet::from_json(&v).is_err());
}

#[test]
fn coefficients_are_homogeneous_in_the_perturbation() {
    let j = jet("s3", (1, 2), 2, 8, Route::Modular);
    for i in 1..=2 {
        for k in 1..=8 {
            assert!(j.get(i, k).unwrap().is_homogeneous_pert(i as u32), "psi_{i},{k}");
        }
    }
}

#[test]
fn second_order_leading_coefficient_is_shared() {
    // At r^1 only the linear parts and the rotation enter, and those are
    // common to the four centers.
    let base = jet("s1", (1, 2), 2, 2, Route::Modular);
    for name in ["s2", "s3", "s4", "s1s2"] {
        let j = jet(name, (1, 2), 2, 2, Route::Modular);
        assert_eq!(j.get(2, 1).unwrap(), base.get(2, 1).unwrap(), "{name}");
    }
}

#[test]
fn symbolic_tau_specializes_to_the_concrete_jet() {
    for name in ["s1", "s3", "s1s2"] {
        let sym = difference_symbolic_tau(case(name), 6).unwrap();
        for (p, q) in [(1, 3), (-1, 2), (2, 7)] {
            let concrete = jet(name, (p, q), 1, 6, Route::Modular);
            for k in 1..=6 {
                assert_eq!(sym.psi1[k].eval(&rat(p, q)), *concrete.get(1, k).unwrap(), "{name} tau = {p}/{q} j = {k}");
            }
        }
    }
}

#[test]
fn second_order_prediction_matches_the_flow() {
    // |Δ − εψ₁ − ε²ψ₂/2| should shrink like ε³.
    let name = case("s1s2");
    let j = jet("s1s2", (1, 2), 2, 15, Route::Modular);
    let mut base = NumericParams::new(rat(1, 2), 0.0).extended();
    for (s, v) in [("a+10", rat(1, 2)), ("b+11", rat(-1, 3)), ("a-02", rat(2, 5)), ("b-20", rat(3, 4))] {
        base.set(s, v).unwrap();
    }
    let r = 0.1;
    let (psi1, psi2) = eval_jet(&j, &base.values, r);
    let eps = [1e-2, 1e-3, 1e-4];
    let res: Vec<f64> = eps
        .iter()
        .map(|&e| {
            let mut p = base.clone();
            p.eps = e;
            (displacement(name, &p, r).unwrap().delta - e * psi1 - 0.5 * e * e * psi2).abs()
        })
        .collect();
    for w in res.windows(2).zip(eps.windows(2)) {
        let slope = (w.0[0] / w.0[1]).ln() / (w.1[0] / w.1[1]).ln();
        assert!(slope > 2.8, "residuals {res:?}");
    }
}

#[test]
fn dependent_rows_only_use_earlier_alphas() {
    for name in ["s3", "s4", "s1s2"] {
        let l = Ladder::build(&jet(name, (1, 2), 1, 15, Route::Modular), PivotPolicy::Paper).unwrap();
        for row in &l.rows {
            if let RowKind::Dependent { combination } = &row.kind {
                for (k, _) in combination {
                    assert!(l.alias_row(*k).unwrap() < row.j, "{name} row {}", row.j);
                }
            }
        }
    }
}
