//! Shared helpers for the integration tests: a small expression parser used
//! to transcribe published coefficient displays, the transcriptions
//! themselves, and the randomized kernel property checks.

#![allow(dead_code)]

use std::collections::BTreeMap;
use std::str::FromStr;

use num_rational::BigRational;
use proptest::prelude::*;
use proptest::test_runner::{Config, TestCaseError, TestRunner};

use pqcycles::trigcalc::fourier::{Basis, ThetaFourierPoly, Trig};
use pqcycles::trigcalc::{parse_rational, rat, Coeff, ParamPoly, PiPoly, Side, Symbol};

type Q = BigRational;

// ---------------------------------------------------------------------------
// Expression parser
//
// Grammar: sums and products of integers, `pi`, `tau`, `alphaN` and
// perturbation names, with `^` for integer powers and `/` by constants.
// Perturbation names are ASCII: `ap10` is a⁺₁₀, `bm02` is b⁻₀₂.

struct Parser<'a> {
    toks: Vec<&'a str>,
    pos: usize,
}

fn tokenize(s: &str) -> Vec<&str> {
    let mut out = Vec::new();
    let b = s.as_bytes();
    let mut i = 0;
    while i < b.len() {
        let c = b[i] as char;
        if c.is_whitespace() {
            i += 1;
        } else if c.is_ascii_alphanumeric() {
            let st = i;
            while i < b.len() && (b[i] as char).is_ascii_alphanumeric() {
                i += 1;
            }
            out.push(&s[st..i]);
        } else {
            out.push(&s[i..i + 1]);
            i += 1;
        }
    }
    out
}

fn ident(name: &str) -> ParamPoly {
    match name {
        "pi" => ParamPoly::constant(PiPoly::pi()),
        "tau" => ParamPoly::var(Symbol::Tau),
        _ if name.starts_with("alpha") => ParamPoly::var(Symbol::from_str(name).expect("alpha index")),
        _ => {
            let b = name.as_bytes();
            assert!(b.len() == 4, "unknown identifier {name}");
            let side = match b[1] {
                b'p' => '+',
                b'm' => '-',
                _ => panic!("unknown identifier {name}"),
            };
            let s = format!("{}{}{}", b[0] as char, side, &name[2..]);
            ParamPoly::var(Symbol::from_str(&s).expect("perturbation name"))
        }
    }
}

fn as_constant(p: &ParamPoly) -> Option<Q> {
    let terms: Vec<_> = p.terms().collect();
    match terms.as_slice() {
        [(m, c)] if m.is_one() && c.is_rational() => Some(c.coeff(0)),
        _ => None,
    }
}

impl<'a> Parser<'a> {
    fn peek(&self) -> Option<&'a str> {
        self.toks.get(self.pos).copied()
    }

    fn next(&mut self) -> &'a str {
        let t = self.toks[self.pos];
        self.pos += 1;
        t
    }

    fn expr(&mut self) -> ParamPoly {
        let mut acc = self.term();
        while let Some(t) = self.peek() {
            match t {
                "+" => {
                    self.next();
                    acc = acc.add(&self.term());
                }
                "-" => {
                    self.next();
                    acc = acc.sub(&self.term());
                }
                _ => break,
            }
        }
        acc
    }

    fn term(&mut self) -> ParamPoly {
        let mut acc = self.unary();
        while let Some(t) = self.peek() {
            match t {
                "*" => {
                    self.next();
                    acc = acc.mul(&self.unary());
                }
                "/" => {
                    self.next();
                    let d = as_constant(&self.unary()).expect("division by a rational constant");
                    acc = acc.scale(&PiPoly::constant(Q::from_integer(1.into()) / d));
                }
                _ => break,
            }
        }
        acc
    }

    fn unary(&mut self) -> ParamPoly {
        if self.peek() == Some("-") {
            self.next();
            return self.unary().neg();
        }
        let base = self.atom();
        if self.peek() == Some("^") {
            self.next();
            let e: u32 = self.next().parse().expect("integer exponent");
            return Coeff::pow(&base, e);
        }
        base
    }

    fn atom(&mut self) -> ParamPoly {
        let t = self.next();
        if t == "(" {
            let e = self.expr();
            assert_eq!(self.next(), ")", "unbalanced parentheses");
            return e;
        }
        if t.as_bytes()[0].is_ascii_digit() {
            return ParamPoly::constant(PiPoly::constant(parse_rational(t).expect("integer")));
        }
        ident(t)
    }
}

/// Parses an arithmetic expression into a parameter polynomial.
pub fn poly(s: &str) -> ParamPoly {
    let mut p = Parser { toks: tokenize(s), pos: 0 };
    let e = p.expr();
    assert!(p.pos == p.toks.len(), "trailing input in {s:?}");
    e
}

pub fn q(s: &str) -> Q {
    parse_rational(s).unwrap()
}

// ---------------------------------------------------------------------------
// Published coefficient displays, transcribed term by term.

/// ψ_{1,1}, common to every pairing.
pub const PSI11: &str = "pi*(ap10 + bp01 + am10 + bm01)/2";

/// Numerator of ψ_{1,2} for S1 with symbolic τ; the denominator is 3(τ²+1)³.
pub const S1_PSI12_NUM: &str = "16*tau^3*(am02 - ap02 + ap01 - am01 - bp11 + bm11) \
    + 4*tau*(3*tau^4 + 2*tau^2 + 3)*(am20 - ap20) \
    - (2*(tau^6 - 3*tau^4 + 3*tau^2 - 1) + 9*pi*(tau^5 + 2*tau^3 + tau))*am10 \
    + (2*(tau^6 - 3*tau^4 + 3*tau^2 - 1) - 9*pi*(tau^5 + 2*tau^3 + tau))*ap10 \
    - (2*(5*tau^6 + 9*tau^4 - 9*tau^2 - 5) + 9*pi*(tau^5 + 2*tau^3 + tau))*bm01 \
    + (2*(5*tau^6 + 9*tau^4 - 9*tau^2 - 5) - 9*pi*(tau^5 + 2*tau^3 + tau))*bp01 \
    + 4*tau*(3*tau^4 + 10*tau^2 + 3)*(bp10 - bm10) \
    + 2*(tau^6 - 3*tau^4 + 3*tau^2 - 1)*(am11 - ap11) \
    + 4*(tau^6 + 3*tau^4 - 3*tau^2 - 1)*(bm02 - bp02) \
    + 2*(tau^6 - 3*tau^4 + 3*tau^2 - 1)*(bm20 - bp20)";

/// Numerator of ψ_{1,2} for S1&S2 with symbolic τ; the denominator is 3(τ²+1)³.
pub const S1S2_PSI12_NUM: &str = "16*tau^3*(ap02 - am02 - bm11 + bp11 - ap01) \
    + 9*pi*(tau^5 + 9*tau^3 + tau)*am10 \
    + (9*pi*(tau^5 + 2*tau^3 + tau) - 2*(tau^6 - 3*tau^4 + 3*tau^2 - 1))*ap10 \
    + 4*tau*(3*tau^4 + 2*tau^2 + 3)*(ap20 - am20) \
    + 2*(tau^6 - 3*tau^4 + 3*tau^2 - 1)*(ap11 - am11) \
    + 3*(3*pi*(tau^5 + 2*tau^3 + tau) + 2*(tau^6 + tau^4 - tau^2 - 1))*bm01 \
    + (9*pi*(tau^5 + 2*tau^3 + tau) - 2*(5*tau^6 + 9*tau^4 - 9*tau^2 - 5))*bp01 \
    - 4*(tau^6 + 3*tau^4 - 4*tau^2 + 4)*bm02 \
    + 4*(tau^6 + 3*tau^4 - 3*tau^2 - 4)*bp02 \
    - 4*tau*(3*tau^4 + 10*tau^2 + 3)*bp10 \
    + 12*(tau^5 + 2*tau^3 + tau)*bm10 \
    + 2*(tau^6 - 3*tau^4 + 3*tau^2 - 1)*(bp20 - bm20)";

pub const TAU_DEN: &str = "3*(tau^2 + 1)^3";

/// S4 at τ = 1/2.
pub const S4_PSI12: &str = "(1024*(am01 - ap01) + 9600*(am02 - ap02) + 4050*(ap11 - am11) \
    + 35400*(am20 - ap20) + 200576*(bp10 - bm10) - (151200*pi + 158832)*bp01 \
    - (151200*pi - 158832)*bm01 - (151200*pi - 10368)*am10 - (151200*pi + 10368)*ap10 \
    + 9600*(bm11 - bp11) + 29700*(bp02 - bm02) + 4050*(bp20 - bm20))/28125";

pub const S4_PSI13: &str = "(225*((15625*pi - 64512)*ap11 + (15625*pi + 64512)*am11) \
    + 34406400*(ap02 - am02 + bp11 - bm11) + 126873600*(ap20 - am20) \
    + 8*((44939675*pi - 71156736)*bm01 + (44939675*pi + 71156736)*bp01) \
    + 3670016*(ap01 - am01) + 2048*((183175*pi - 18144)*am10 + (183175*pi + 18144)*ap10) \
    - 300*((15625*pi - 354816)*bm02 + (15625*pi + 354816)*bp02) \
    + 718864384*(bm10 - bp10) \
    - 150*((78125*pi - 96768)*bm20 + (78125*pi + 96768)*bp20))/7031250";

pub const S4_PSI21: &str = "pi^2*(ap10^2 - am10^2 + bp01^2 - bm01^2) \
    + 2*pi*(bp01*bp10 - (am10 + bm01)*am01 + (pi*bp01 + bp10)*ap10 \
    - (pi*bm01 - bm10)*am10 - (ap10 + bp01)*ap01 + bm01*bm10)";

pub const S1S2_PSI21: &str = "pi*((bp01 + ap10)^2*pi - 2*(bp01 + ap10)*(bp10 - ap01) \
    - (bm01 + am10)^2*pi - 2*(bm01 + am10)*(bm10 - am01))/4";

/// Dependent ladder rows at τ = 1/2 under the replication pivot order:
/// `(case, j, [c_1, c_2, …])` meaning `ψ̃_{1,j} = Σ c_l α_l`.
pub const LADDER_ROWS: &[(&str, usize, &[&str])] = &[
    (
        "s4",
        7,
        &[
            "-13061776996188618752/2780914306640625",
            "-54153241671606272/7415771484375",
            "-1319866958176/263671875",
            "-92382032896/52734375",
            "-44894744/140625",
            "-3584/125",
        ],
    ),
    (
        "s4",
        9,
        &[
            "35427806878368205783957504/14483928680419921875",
            "1313963570140369073668096/347614288330078125",
            "7121695391403890212096/2780914306640625",
            "1296197793646163968/1483154296875",
            "2960772455199952/19775390625",
            "23193321472/2109375",
            "-896/25",
        ],
    ),
    (
        "s4",
        11,
        &[
            "-30988402760095390237763808174014464/18331222236156463623046875",
            "-382824149846431286161826196488192/146649777889251708984375",
            "-76744035193724040416612082688/43451786041259765625",
            "-69650183483775462018056192/115871429443359375",
            "-284726400765915795149312/2780914306640625",
            "-18339444472611340288/2471923828125",
            "354937470976/17578125",
            "-5376/125",
        ],
    ),
    (
        "s3",
        7,
        &[
            "-123396623697969152/2780914306640625",
            "47519539134464/274658203125",
            "-69377982464/263671875",
            "10399227904/52734375",
            "-10598144/140625",
            "5248/375",
        ],
    ),
    (
        "s3",
        9,
        &[
            "79291845609546636591104/14483928680419921875",
            "-22147997279223453581312/1042842864990234375",
            "88803259464124727296/2780914306640625",
            "-1282919781892096/54931640625",
            "55373245251584/6591796875",
            "-898318336/703125",
            "1312/75",
        ],
    ),
    (
        "s3",
        11,
        &[
            "-16497681899886282309893372248064/18331222236156463623046875",
            "170572198789950520780428148736/48883259296417236328125",
            "-683024555783581807897739264/130355358123779296875",
            "1328662146680609176551424/347614288330078125",
            "-3801923790886678822912/2780914306640625",
            "169088920535957504/823974609375",
            "-123758313472/52734375",
            "2624/125",
        ],
    ),
    (
        "s1s2",
        9,
        &["27456/390625", "-36752/78125", "-22027/3125", "-163833/6250", "-94071/2000", "-5856/125", "-663/25", "-8"],
    ),
    (
        "s1s2",
        11,
        &[
            "-26849248/9765625",
            "36771864/1953125",
            "43321833/156250",
            "12752699/12500",
            "900727361/500000",
            "5440604/3125",
            "4604183/5000",
            "5632/25",
            "-48/5",
        ],
    ),
];

/// Published blow-up solutions, in the order of the h-system unknowns.
pub const BLOWUP_SOLUTIONS: &[(&str, &[f64])] = &[
    ("s4", &[-1.755e7, -1.318e9, 0.8838, 0.09214, -0.08745]),
    ("s3", &[1.403409714e12, -1.862257817e4]),
    ("s1s2", &[-1.267678465e11, -8.373115792e4, 5.752432052e4]),
];

// ---------------------------------------------------------------------------
// Randomized kernel properties

pub type Tf = ThetaFourierPoly<Q>;

fn small_rational() -> impl Strategy<Value = Q> {
    (-30i64..=30, 1i64..=12).prop_map(|(n, d)| rat(n, d))
}

fn basis(max_k: u32, max_j: u32) -> impl Strategy<Value = Basis> {
    (0..=max_k, 0..=max_j, any::<bool>()).prop_map(|(k, j, s)| {
        let kind = if s && j > 0 { Trig::Sin } else { Trig::Cos };
        Basis::new(k, j, kind)
    })
}

/// Random θ-Fourier polynomial with at most `terms` terms.
pub fn tf(max_k: u32, max_j: u32, terms: usize) -> impl Strategy<Value = Tf> {
    prop::collection::vec((basis(max_k, max_j), small_rational()), 0..=terms).prop_map(Tf::from_terms)
}

/// Power-basis coefficients `c_{m,n}` of `cos^m θ sin^n θ`, each a
/// π-polynomial times a perturbation symbol or a constant.
fn power_basis() -> impl Strategy<Value = BTreeMap<(u32, u32), ParamPoly>> {
    let coeff = (small_rational(), small_rational(), 0usize..3).prop_map(|(a, b, s)| {
        let c = ParamPoly::constant(PiPoly::new(vec![a, b]));
        match s {
            0 => c,
            1 => c.mul(&ParamPoly::var(Symbol::from_str("a+10").unwrap())),
            _ => c.mul(&ParamPoly::var(Symbol::from_str("b-02").unwrap())),
        }
    });
    prop::collection::btree_map((0u32..=5, 0u32..=5), coeff, 0..=6)
}

fn config(cases: u32) -> Config {
    Config { cases, failure_persistence: None, ..Config::default() }
}

/// `d/dθ ∫p = p` and `(∫p)(0) = 0`.
pub fn check_round_trip(cases: u32) -> Result<(), String> {
    TestRunner::new(config(cases))
        .run(&tf(3, 6, 6), |p| {
            let ip = p.integrate();
            prop_assert!(ip.derivative() == p, "derivative of the antiderivative differs");
            prop_assert!(Coeff::is_zero(&ip.eval_zero()), "antiderivative does not vanish at 0");
            Ok(())
        })
        .map_err(|e| e.to_string())
}

/// Commutativity, associativity and distributivity of the product.
pub fn check_ring_axioms(cases: u32) -> Result<(), String> {
    TestRunner::new(config(cases))
        .run(&(tf(2, 4, 4), tf(2, 4, 4), tf(2, 4, 4)), |(a, b, c)| {
            prop_assert!(a.mul(&b) == b.mul(&a), "product not commutative");
            prop_assert!(a.mul(&b).mul(&c) == a.mul(&b.mul(&c)), "product not associative");
            prop_assert!(a.mul(&b.add(&c)) == a.mul(&b).add(&a.mul(&c)), "product does not distribute");
            prop_assert!(a.add(&b).sub(&b) == a, "subtraction does not undo addition");
            Ok(())
        })
        .map_err(|e| e.to_string())
}

/// Exact value at θ = π of the linearized power-basis polynomial against
/// direct floating evaluation of `Σ c cos^m π sin^n π`.
pub fn check_eval_pi(cases: u32) -> Result<(), String> {
    let strat = (power_basis(), small_rational(), small_rational());
    TestRunner::new(config(cases))
        .run(&strat, |(c, a10, b02)| {
            let val = |s: Symbol| match s.to_string().as_str() {
                "a+10" => a10.clone(),
                "b-02" => b02.clone(),
                _ => unreachable!(),
            };
            let numeric = |p: &ParamPoly| p.eval_f64(|pp| pp.eval_f64(std::f64::consts::PI), |s| f64_of(&val(s)));
            let exact: f64 = ThetaFourierPoly::from_power_basis(&c)
                .eval_pi_powers(Side::Plus)
                .iter()
                .enumerate()
                .map(|(k, p)| numeric(p) * std::f64::consts::PI.powi(k as i32))
                .sum();
            let (cpi, spi) = (std::f64::consts::PI.cos(), std::f64::consts::PI.sin());
            let direct: f64 = c.iter().map(|(&(m, n), p)| numeric(p) * cpi.powi(m as i32) * spi.powi(n as i32)).sum();
            let scale = 1.0 + c.values().map(|p| numeric(p).abs()).sum::<f64>();
            prop_assert!((exact - direct).abs() <= 1e-12 * scale, "exact {exact} vs direct {direct}");
            Ok(())
        })
        .map_err(|e| e.to_string())
}

/// Rotation by τ = 0 is the identity, and rotation preserves the harmonic degree.
pub fn check_rotation(cases: u32) -> Result<(), String> {
    let strat = (tf(0, 8, 6), small_rational());
    TestRunner::new(config(cases))
        .run(&strat, |(p, t)| {
            let r0 = p.rotate(&rat(0, 1)).map_err(|e| TestCaseError::fail(e.to_string()))?;
            prop_assert!(r0 == p, "rotation by tau = 0 changed the polynomial");
            if t.numer() * t.numer() < t.denom() * t.denom() {
                let r = p.rotate(&t).map_err(|e| TestCaseError::fail(e.to_string()))?;
                prop_assert_eq!(r.harmonic_degree(), p.harmonic_degree());
            }
            Ok(())
        })
        .map_err(|e| e.to_string())
}

pub fn f64_of(x: &Q) -> f64 {
    pqcycles::trigcalc::coeff::rational_to_f64(x)
}
