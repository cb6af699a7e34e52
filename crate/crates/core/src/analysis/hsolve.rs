//! High-precision Newton solve of a truncated h-system with residual and
//! transversality certificates.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::blowup::{FracPoly, HSystem};
use crate::error::{Error, Result};
use crate::trigcalc::coeff::{format_scientific, pi_rational, rational_to_f64, round_significant};
use crate::trigcalc::{Poly, Symbol};

/// Scaled-determinant threshold for transversality.
pub const SCALED_DET_MIN: f64 = 1e-8;

#[derive(Clone, Debug)]
pub struct SolveOptions {
    /// Working precision in significant decimal digits.
    pub digits: u32,
    /// Starting point; a seeded multistart search runs when absent.
    pub init: Option<Vec<f64>>,
    pub seed: u64,
    pub starts: usize,
    pub max_iter: usize,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions { digits: 50, init: None, seed: 1, starts: 400, max_iter: 80 }
    }
}

/// Solution of an h-system and its certificates.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct HSolution {
    pub case: String,
    pub unknowns: Vec<String>,
    /// Solution components in scientific notation at the working precision.
    pub values: Vec<String>,
    pub values_f64: Vec<f64>,
    pub digits: u32,
    /// `max_i |h_{i,0}(x)|` evaluated exactly at the rounded solution.
    pub residual: f64,
    pub residual_bound: f64,
    pub jacobian_det: f64,
    /// Determinant after scaling columns by the solution magnitudes and
    /// normalising each row to unit max-norm.
    pub scaled_det: f64,
    pub extra_row: usize,
    pub extra_value: f64,
    pub iterations: usize,
}

impl HSolution {
    pub fn residual_ok(&self) -> bool {
        self.residual <= self.residual_bound
    }

    pub fn transversal(&self) -> bool {
        self.scaled_det.abs() >= SCALED_DET_MIN
    }

    pub fn extra_nonzero(&self) -> bool {
        self.extra_value != 0.0
    }

    pub fn certified(&self) -> bool {
        self.residual_ok() && self.transversal() && self.extra_nonzero()
    }
}

type QPoly = Poly<BigRational>;

struct Compiled {
    unknowns: Vec<Symbol>,
    eqs: Vec<QPoly>,
    jac: Vec<Vec<QPoly>>,
}

fn to_q(p: &FracPoly, pi: &BigRational, digits: u32) -> QPoly {
    p.map_coeffs(|c| round_significant(&c.eval_rational(pi), digits))
}

fn compile(hs: &HSystem, digits: u32) -> Compiled {
    let pi = pi_rational();
    let eqs: Vec<QPoly> = hs.equations.iter().map(|(_, p)| to_q(p, &pi, digits)).collect();
    let jac = eqs.iter().map(|e| hs.unknowns.iter().map(|&s| e.derivative(s)).collect()).collect();
    Compiled { unknowns: hs.unknowns.clone(), eqs, jac }
}

fn eval_q(p: &QPoly, syms: &[Symbol], x: &[BigRational]) -> BigRational {
    let mut acc = BigRational::zero();
    for (m, c) in p.terms() {
        let mut t = c.clone();
        for &(s, e) in m.pairs() {
            let i = syms.iter().position(|&u| u == s).expect("unknown symbol");
            t *= num_traits::pow(x[i].clone(), e as usize);
        }
        acc += t;
    }
    acc
}

fn eval_f(p: &QPoly, syms: &[Symbol], x: &[f64]) -> f64 {
    p.eval_f64(rational_to_f64, |s| x[syms.iter().position(|&u| u == s).expect("unknown symbol")])
}

/// Sum of absolute term values, used as the natural scale of a residual.
fn term_scale(p: &QPoly, syms: &[Symbol], x: &[f64]) -> f64 {
    p.eval_f64(|c| rational_to_f64(c).abs(), |s| x[syms.iter().position(|&u| u == s).expect("unknown symbol")].abs())
}

/// Gaussian elimination; returns `(solution of A y = b, det A)` or `None`
/// when `A` is singular.
fn solve_q(mut a: Vec<Vec<BigRational>>, mut b: Vec<BigRational>) -> Option<(Vec<BigRational>, BigRational)> {
    let n = b.len();
    let mut det = BigRational::from_integer(BigInt::from(1));
    for k in 0..n {
        let p = (k..n).filter(|&i| !a[i][k].is_zero()).max_by(|&i, &j| {
            rational_to_f64(&a[i][k]).abs().total_cmp(&rational_to_f64(&a[j][k]).abs())
        })?;
        if p != k {
            a.swap(p, k);
            b.swap(p, k);
            det = -det;
        }
        det *= &a[k][k];
        for i in k + 1..n {
            if a[i][k].is_zero() {
                continue;
            }
            let f = &a[i][k] / &a[k][k];
            for j in k..n {
                let t = &f * &a[k][j];
                a[i][j] -= t;
            }
            let t = &f * &b[k];
            b[i] -= t;
        }
    }
    let mut y = vec![BigRational::zero(); n];
    for k in (0..n).rev() {
        let mut s = b[k].clone();
        for j in k + 1..n {
            s -= &a[k][j] * &y[j];
        }
        y[k] = s / &a[k][k];
    }
    Some((y, det))
}

fn solve_f(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for k in 0..n {
        let p = (k..n).max_by(|&i, &j| a[i][k].abs().total_cmp(&a[j][k].abs()))?;
        if a[p][k] == 0.0 || !a[p][k].is_finite() {
            return None;
        }
        a.swap(p, k);
        b.swap(p, k);
        for i in k + 1..n {
            let f = a[i][k] / a[k][k];
            for j in k..n {
                a[i][j] -= f * a[k][j];
            }
            b[i] -= f * b[k];
        }
    }
    let mut y = vec![0.0; n];
    for k in (0..n).rev() {
        let s: f64 = b[k] - (k + 1..n).map(|j| a[k][j] * y[j]).sum::<f64>();
        y[k] = s / a[k][k];
    }
    y.iter().all(|v| v.is_finite()).then_some(y)
}

fn det_f(mut a: Vec<Vec<f64>>) -> f64 {
    let n = a.len();
    let mut det = 1.0;
    for k in 0..n {
        let p = (k..n).max_by(|&i, &j| a[i][k].abs().total_cmp(&a[j][k].abs())).expect("square");
        if a[p][k] == 0.0 {
            return 0.0;
        }
        if p != k {
            a.swap(p, k);
            det = -det;
        }
        det *= a[k][k];
        for i in k + 1..n {
            let f = a[i][k] / a[k][k];
            for j in k..n {
                a[i][j] -= f * a[k][j];
            }
        }
    }
    det
}

/// Damped Newton in `f64`; returns a point whose relative residual is small.
fn newton_f64(c: &Compiled, x0: &[f64], iters: usize) -> Option<Vec<f64>> {
    let syms = &c.unknowns;
    let mut x = x0.to_vec();
    let rel = |x: &[f64]| -> f64 {
        c.eqs
            .iter()
            .map(|e| eval_f(e, syms, x).abs() / term_scale(e, syms, x).max(f64::MIN_POSITIVE))
            .fold(0.0, f64::max)
    };
    let mut r = rel(&x);
    for _ in 0..iters {
        if r < 1e-12 {
            return Some(x);
        }
        let a: Vec<Vec<f64>> = c.jac.iter().map(|row| row.iter().map(|d| eval_f(d, syms, &x)).collect()).collect();
        let b: Vec<f64> = c.eqs.iter().map(|e| eval_f(e, syms, &x)).collect();
        let dx = solve_f(a, b)?;
        let mut t = 1.0;
        loop {
            let y: Vec<f64> = x.iter().zip(&dx).map(|(xi, d)| xi - t * d).collect();
            let ry = rel(&y);
            if ry.is_finite() && (ry < r || t < 1e-6) {
                x = y;
                r = ry;
                break;
            }
            t *= 0.5;
        }
    }
    (r < 1e-9).then_some(x)
}

fn starting_point(c: &Compiled, opt: &SolveOptions) -> Result<Vec<f64>> {
    let n = c.unknowns.len();
    if let Some(init) = &opt.init {
        if init.len() != n {
            return Err(Error::Invalid(format!("initial point has {} entries, expected {n}", init.len())));
        }
        return newton_f64(c, init, 200)
            .ok_or_else(|| Error::NoConvergence("Newton from the given initial point".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(opt.seed);
    let mut start = vec![0.0; n];
    for k in 0..opt.starts.max(1) {
        if let Some(x) = newton_f64(c, &start, 100) {
            return Ok(x);
        }
        // Log-uniform magnitudes cover the wide spread of scales in these systems.
        start = (0..n)
            .map(|_| {
                let mag = 10f64.powf(rng.gen_range(-3.0..(3.0 + (k as f64) / 20.0).min(14.0)));
                if rng.gen_bool(0.5) {
                    mag
                } else {
                    -mag
                }
            })
            .collect();
    }
    Err(Error::NoConvergence(format!("no start out of {} converged", opt.starts)))
}

/// Solves `h_{i,0} = 0` and certifies the solution.
pub fn solve_h_system(hs: &HSystem, opt: &SolveOptions) -> Result<HSolution> {
    let n = hs.unknowns.len();
    if hs.equations.len() != n {
        return Err(Error::Invalid(format!("{} equations in {n} unknowns", hs.equations.len())));
    }
    let work = opt.digits + 20;
    let c = compile(hs, work + 10);
    let syms = &c.unknowns;
    let x0 = starting_point(&c, opt)?;
    let mut x: Vec<BigRational> = x0.iter().map(|&v| round_significant(&crate::trigcalc::coeff::f64_to_rational(v), work)).collect();
    let mut iterations = 0;
    let tol = BigRational::new(BigInt::from(1), num_traits::pow(BigInt::from(10), work as usize - 5));
    loop {
        if iterations >= opt.max_iter {
            return Err(Error::NoConvergence(format!("high-precision Newton after {iterations} steps")));
        }
        iterations += 1;
        let a: Vec<Vec<BigRational>> = c.jac.iter().map(|row| row.iter().map(|d| eval_q(d, syms, &x)).collect()).collect();
        let b: Vec<BigRational> = c.eqs.iter().map(|e| eval_q(e, syms, &x)).collect();
        let (dx, _) = solve_q(a, b).ok_or_else(|| Error::Certificate("singular Jacobian during refinement".into()))?;
        let mut done = true;
        for (xi, d) in x.iter_mut().zip(&dx) {
            let scale = if xi.is_zero() { BigRational::from_integer(1.into()) } else { xi.abs() };
            if d.abs() > &tol * scale {
                done = false;
            }
            *xi = round_significant(&(&*xi - d), work);
        }
        if done {
            break;
        }
    }
    let x: Vec<BigRational> = x.iter().map(|v| round_significant(v, opt.digits)).collect();
    let xf: Vec<f64> = x.iter().map(rational_to_f64).collect();
    let residual = c.eqs.iter().map(|e| rational_to_f64(&eval_q(e, syms, &x)).abs()).fold(0.0, f64::max);
    let jm: Vec<Vec<f64>> = c.jac.iter().map(|row| row.iter().map(|d| eval_f(d, syms, &xf)).collect()).collect();
    let jacobian_det = det_f(jm.clone());
    let scaled: Vec<Vec<f64>> = jm
        .iter()
        .map(|row| {
            let r: Vec<f64> = row.iter().zip(&xf).map(|(v, xi)| v * if *xi == 0.0 { 1.0 } else { xi.abs() }).collect();
            let m = r.iter().fold(0.0f64, |a, v| a.max(v.abs()));
            r.iter().map(|v| if m > 0.0 { v / m } else { 0.0 }).collect()
        })
        .collect();
    let scaled_det = det_f(scaled);
    let pi = pi_rational();
    let extra = to_q(&hs.extra.1, &pi, work);
    let extra_value = rational_to_f64(&eval_q(&extra, syms, &x));
    Ok(HSolution {
        case: hs.case.clone(),
        unknowns: syms.iter().map(|s| s.to_string()).collect(),
        values: x.iter().map(|v| format_scientific(v, opt.digits)).collect(),
        values_f64: xf,
        digits: opt.digits,
        residual,
        residual_bound: 10f64.powi(-(opt.digits as i32) / 2),
        jacobian_det,
        scaled_det,
        extra_row: hs.extra.0,
        extra_value,
        iterations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::PiFrac;
    use crate::trigcalc::{int, Monomial, PiPoly};

    fn frac(n: i64) -> PiFrac {
        PiFrac::from_poly(PiPoly::constant(int(n)))
    }

    #[test]
    fn solves_small_quadratic_system() {
        // x^2 - 2 = 0, x*y - 3 = 0
        let (x, y) = (Symbol::Z(1), Symbol::Z(2));
        let e1 = FracPoly::from_terms([(Monomial::from_pairs(vec![(x, 2)]), frac(1)), (Monomial::one(), frac(-2))]);
        let e2 = FracPoly::from_terms([(Monomial::from_pairs(vec![(x, 1), (y, 1)]), frac(1)), (Monomial::one(), frac(-3))]);
        let hs = HSystem {
            case: "toy".into(),
            unknowns: vec![x, y],
            equations: vec![(1, e1), (2, e2)],
            extra: (3, FracPoly::constant(frac(1))),
        };
        let opt = SolveOptions { init: Some(vec![1.0, 1.0]), ..Default::default() };
        let s = solve_h_system(&hs, &opt).unwrap();
        assert!((s.values_f64[0] - 2f64.sqrt()).abs() < 1e-14);
        assert!((s.values_f64[1] - 3.0 / 2f64.sqrt()).abs() < 1e-14);
        assert!(s.values[0].starts_with("1.41421356237309504880168872420969807856967187537"));
        assert!(s.certified(), "{s:?}");
        // Multistart finds one of the two roots.
        let s = solve_h_system(&hs, &SolveOptions::default()).unwrap();
        assert!((s.values_f64[0].abs() - 2f64.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn singular_system_is_rejected() {
        let (x, y) = (Symbol::Z(1), Symbol::Z(2));
        let lin = |a: i64, b: i64, c: i64| {
            FracPoly::from_terms([(Monomial::var(x), frac(a)), (Monomial::var(y), frac(b)), (Monomial::one(), frac(c))])
        };
        let hs = HSystem {
            case: "toy".into(),
            unknowns: vec![x, y],
            equations: vec![(1, lin(1, 2, 1)), (2, lin(2, 4, 5))],
            extra: (3, FracPoly::constant(frac(1))),
        };
        assert!(solve_h_system(&hs, &SolveOptions { starts: 20, ..Default::default() }).is_err());
    }
}
