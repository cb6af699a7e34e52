//! Integrated-flow checks: center closure on random lines and radii,
//! transversality of every landing, and agreement of the two precisions.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use pqcycles::numeric::{center_closure, displacement, NumericParams, TRANSVERSAL_MIN};
use pqcycles::systems::CaseName;
use pqcycles::trigcalc::rat;

fn centers() -> Vec<CaseName> {
    ["s1", "s2", "s3", "s4", "s1s2"].iter().map(|s| s.parse().unwrap()).collect()
}

#[test]
fn builtin_centers_close_on_random_lines() {
    let mut rng = ChaCha8Rng::seed_from_u64(50);
    for name in centers() {
        for _ in 0..50 {
            let d: i64 = rng.gen_range(1..=20);
            let tau = rat(rng.gen_range(-d..d), d);
            // Kept inside every period annulus for every line.
            let r = rng.gen_range(0.01..0.1);
            let c = center_closure(name, &tau, r).unwrap();
            assert!(c <= 1e-9, "{name} tau = {tau} r = {r}: closure {c:e}");
        }
    }
}

#[test]
fn every_landing_is_transversal() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for name in centers() {
        for _ in 0..10 {
            let mut p = NumericParams::new(rat(1, 2), 1e-3);
            p.set_f64("a+10", rng.gen_range(-1.0..1.0)).unwrap();
            p.set_f64("b-02", rng.gen_range(-1.0..1.0)).unwrap();
            let d = displacement(name, &p, rng.gen_range(0.01..0.1)).unwrap();
            for h in [d.plus, d.minus] {
                assert!(h.normal_speed.abs() > TRANSVERSAL_MIN, "{name}: normal speed {}", h.normal_speed);
            }
        }
    }
}

#[test]
fn extended_precision_agrees_with_double() {
    let name: CaseName = "s1s2".parse().unwrap();
    let mut p = NumericParams::new(rat(1, 2), 1e-2);
    p.set("a+10", rat(1, 3)).unwrap();
    p.set("b-11", rat(-2, 7)).unwrap();
    let d = displacement(name, &p, 0.1).unwrap().delta;
    let e = displacement(name, &p.clone().extended(), 0.1).unwrap().delta;
    assert!((d - e).abs() <= 1e-13, "double {d:e} extended {e:e}");
}
