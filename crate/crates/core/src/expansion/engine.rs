//! r-series recursion for one half system over an arbitrary coefficient field.
//!
//! With `φ = φ0 + εφ1 + ε²φ2 + …` the Taylor expansion of the solution of
//! `dr/dθ = F(θ, r, ε)` with `r(0) = r`, and `D = 1 + φ0 B`:
//!
//! * `φ0` solves `D φ0' = A φ0²`;
//! * `Y = ∂φ0/∂r` solves the variational equation, so every higher order is
//!   `φi = Y ∫₀^θ Si / (D^{i+1} Y)` for a source `Si` built from lower orders;
//! * `S1 = f1(φ0)` and
//!   `S2 = f2(φ0) + (f1'(φ0) D − 2 B f1(φ0)) φ1 + A φ1²`.
//!
//! Everything is linear (order 1) or quadratic (order 2) in the ten
//! perturbation coefficients of the side, so both orders are computed per
//! coefficient and per pair of coefficients with scalar field entries.

use super::dense::{half, Dense, IntTable};
use crate::error::{Error, Result};
use crate::trigcalc::{Coeff, Side};

pub type Series<F> = Vec<Dense<F>>;

/// Polar data of one perturbation coefficient: contributes `r^degree (U, W)`.
#[derive(Clone, Debug)]
pub struct PertInput<F> {
    pub degree: usize,
    pub u: Dense<F>,
    pub w: Dense<F>,
}

#[derive(Clone, Debug)]
pub struct SideInput<F> {
    pub side: Side,
    pub a: Dense<F>,
    pub b: Dense<F>,
    pub pert: Vec<PertInput<F>>,
}

/// Truncation order and degree caps.
#[derive(Clone, Copy, Debug)]
pub struct Limits {
    pub n: usize,
    pub max_k: usize,
    pub max_j: usize,
}

impl Limits {
    pub fn new(n: usize) -> Self {
        Limits { n, max_k: n + 1, max_j: 3 * (n + 2) }
    }
}

/// `Σ_j c_j π^j` values indexed by r-power.
pub type PiSeries<F> = Vec<Vec<F>>;

/// Per-side output; all values are taken at `θ = π` (plus) or `θ = −π` (minus).
#[derive(Clone, Debug)]
pub struct SideResult<F> {
    pub psi0: PiSeries<F>,
    /// One series per coefficient, in local-index order.
    pub psi1: Vec<PiSeries<F>>,
    /// Pairs `(p, q)` with `p ≤ q`, in lexicographic order.
    pub psi2: Vec<((usize, usize), PiSeries<F>)>,
    /// Full functions when requested: `ξ0`, `ξ1` per coefficient, `ξ2` per pair.
    pub xi0: Option<Series<F>>,
    pub xi1: Option<Vec<Series<F>>>,
    pub xi2: Option<Vec<Series<F>>>,
}

fn zero_series<F: Coeff>(n: usize) -> Series<F> {
    vec![Dense::zero(); n + 1]
}

fn check<F: Coeff>(d: &Dense<F>, lim: &Limits, what: &str) -> Result<()> {
    if d.kd() > lim.max_k || d.hd() > lim.max_j {
        return Err(Error::CapExceeded(format!(
            "{what}: θ-power {} (cap {}), harmonic {} (cap {})",
            d.kd(),
            lim.max_k,
            d.hd(),
            lim.max_j
        )));
    }
    Ok(())
}

/// `Σ_a x_a y_{j−a}` accumulated twice into `acc` (call [`finish`] after).
fn conv_acc2<F: Coeff>(acc: &mut Dense<F>, x: &Series<F>, y: &Series<F>, j: usize) {
    for a in 0..=j {
        if a < x.len() && j - a < y.len() {
            acc.mul_acc2(&x[a], &y[j - a]);
        }
    }
}

fn finish<F: Coeff>(mut d: Dense<F>) -> Dense<F> {
    d = d.scale(&half());
    d.trim();
    d
}

fn series_mul<F: Coeff>(x: &Series<F>, y: &Series<F>, n: usize) -> Series<F> {
    (0..=n)
        .map(|j| {
            let mut acc = Dense::zero();
            conv_acc2(&mut acc, x, y, j);
            finish(acc)
        })
        .collect()
}

/// Levelwise product with a θ-polynomial.
fn times<F: Coeff>(t: &Dense<F>, x: &Series<F>) -> Series<F> {
    x.iter().map(|d| if d.is_zero() { Dense::zero() } else { t.mul(d) }).collect()
}

/// Inverse of a series with constant term 1.
fn series_inverse<F: Coeff>(x: &Series<F>, n: usize) -> Result<Series<F>> {
    let mut c0 = x[0].clone();
    c0.trim();
    if c0 != Dense::constant(F::one()) {
        return Err(Error::Structural("series inversion needs constant term 1".into()));
    }
    let mut out: Series<F> = vec![Dense::constant(F::one())];
    for j in 1..=n {
        let mut acc = Dense::zero();
        for a in 1..=j {
            if a < x.len() {
                acc.mul_acc2(&x[a], &out[j - a]);
            }
        }
        out.push(finish(acc).scale(&F::one().neg()));
    }
    Ok(out)
}

fn pi_series<F: Coeff>(x: &Series<F>, side: Side) -> PiSeries<F> {
    x.iter().map(|d| d.eval_pi(side)).collect()
}

fn pi_mul<F: Coeff>(a: &[F], b: &[F]) -> Vec<F> {
    let mut out = vec![F::zero(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j].mul_add_assign(x, y);
        }
    }
    out
}

fn pi_series_mul<F: Coeff>(x: &PiSeries<F>, y: &PiSeries<F>, n: usize) -> PiSeries<F> {
    (0..=n)
        .map(|j| {
            let mut acc: Vec<F> = vec![F::zero()];
            for a in 0..=j {
                if a < x.len() && j - a < y.len() {
                    let p = pi_mul(&x[a], &y[j - a]);
                    if acc.len() < p.len() {
                        acc.resize(p.len(), F::zero());
                    }
                    for (s, v) in acc.iter_mut().zip(&p) {
                        s.add_assign(v);
                    }
                }
            }
            acc
        })
        .collect()
}

pub struct Options {
    pub order: usize,
    pub full: bool,
}

pub fn run_side<F: Coeff>(inp: &SideInput<F>, lim: &Limits, opt: &Options) -> Result<SideResult<F>> {
    let n = lim.n;
    if n < 2 {
        return Err(Error::Invalid("truncation order N must be at least 2".into()));
    }
    let tab = IntTable::<F>::new(lim.max_k + 2, lim.max_j + 8);
    let (a, b) = (&inp.a, &inp.b);
    let side = inp.side;
    let neg_half = half::<F>().neg();

    // order 0: x' = A [φ0²]_j − ½ B [φ0²]_j'
    let mut x = zero_series::<F>(n);
    let mut p2 = zero_series::<F>(n);
    x[1] = Dense::constant(F::one());
    for j in 2..=n {
        let mut acc = Dense::zero();
        conv_acc2(&mut acc, &x, &x, j);
        let s2 = finish(acc);
        let mut xp = a.mul(&s2);
        xp.add_scaled(&b.mul(&s2.derivative()), &neg_half);
        let mut xj = xp.integrate(&tab)?;
        xj.trim();
        check(&xj, lim, "ξ0")?;
        x[j] = xj;
        p2[j] = s2;
    }
    let psi0 = pi_series(&x, side);
    let mut res = SideResult { psi0, psi1: vec![], psi2: vec![], xi0: None, xi1: None, xi2: None };
    if opt.full {
        res.xi0 = Some(x.clone());
    }
    if opt.order == 0 {
        return Ok(res);
    }

    // powers of φ0
    let mut pw: Vec<Series<F>> = Vec::with_capacity(5);
    let mut one = zero_series::<F>(n);
    one[0] = Dense::constant(F::one());
    pw.push(one.clone());
    pw.push(x.clone());
    pw.push(p2);
    let top = if opt.order >= 2 { 4 } else { 3 };
    while pw.len() <= top {
        let next = series_mul(pw.last().expect("nonempty"), &x, n);
        pw.push(next);
    }

    // Y = ∂φ0/∂r
    let mut y0 = zero_series::<F>(n);
    for i in 0..n {
        y0[i] = x[i + 1].scale(&F::from_int((i + 1) as i64));
    }
    let mut d = times(b, &x);
    d[0] = Dense::constant(F::one());
    let dy = series_mul(&d, &y0, n);
    let d2y = series_mul(&d, &dy, n);
    let g1 = series_inverse(&d2y, n)?;

    let q: Vec<Series<F>> = (0..=top.min(3)).map(|m| series_mul(&pw[m], &g1, n)).collect();
    let y_pi = pi_series(&y0, side);

    let mut ys: Vec<Series<F>> = Vec::new();
    let mut vs: Vec<Dense<F>> = Vec::new();
    for pin in &inp.pert {
        let dd = pin.degree;
        let v = pin.u.mul(b).sub_dense(&a.mul(&pin.w));
        let mut i1 = zero_series::<F>(n);
        for j in 1..=n {
            let mut acc = pin.u.mul(&q[dd + 1][j]);
            acc.add_assign(&v.mul(&q[dd + 2][j]));
            acc.trim();
            let mut ij = acc.integrate(&tab)?;
            ij.trim();
            check(&ij, lim, "order-1 integral")?;
            i1[j] = ij;
        }
        res.psi1.push(pi_series_mul(&y_pi, &pi_series(&i1, side), n));
        if opt.order >= 2 || opt.full {
            let yp = series_mul(&y0, &i1, n);
            for t in &yp {
                check(t, lim, "ξ1")?;
            }
            ys.push(yp);
        }
        vs.push(v);
    }
    if opt.full {
        res.xi1 = Some(ys.clone());
    }
    if opt.order < 2 {
        return Ok(res);
    }

    // order 2
    let d3y = series_mul(&d, &d2y, n);
    let g = series_inverse(&d3y, n)?;
    let gp: Vec<Series<F>> = (0..=4).map(|m| series_mul(&g, &pw[m], n)).collect();
    let ag = times(a, &g);
    let mut hs: Vec<Series<F>> = Vec::new();
    let mut ms: Vec<Series<F>> = Vec::new();
    for (idx, pin) in inp.pert.iter().enumerate() {
        let dd = pin.degree;
        let v = &vs[idx];
        // E = (d+1) U P_d + ((d−1) U B + (d+2) V) P_{d+1} + d V B P_{d+2}
        let ub = pin.u.mul(b);
        let c1 = ub.scale(&F::from_int(dd as i64 - 1)).add_dense(&v.scale(&F::from_int(dd as i64 + 2)));
        let mut e = times(&pin.u.scale(&F::from_int(dd as i64 + 1)), &pw[dd]);
        let e1 = times(&c1, &pw[dd + 1]);
        for (t, s) in e.iter_mut().zip(&e1) {
            t.add_assign(s);
        }
        if dd > 0 {
            let vb = v.mul(b).scale(&F::from_int(dd as i64));
            let e2 = times(&vb, &pw[dd + 2]);
            for (t, s) in e.iter_mut().zip(&e2) {
                t.add_assign(s);
            }
        }
        for t in e.iter_mut() {
            t.trim();
        }
        hs.push(series_mul(&e, &g, n));
        ms.push(series_mul(&ag, &ys[idx], n));
    }
    let np = inp.pert.len();
    let mut xi2 = Vec::new();
    for p in 0..np {
        for qq in p..np {
            let (pp, pq) = (&inp.pert[p], &inp.pert[qq]);
            let e = pp.degree + pq.degree;
            let mut g1c = pp.u.mul(&pq.w);
            let mut aww = a.mul(&pp.w).mul(&pq.w);
            let mcoef;
            if p != qq {
                g1c.add_assign(&pq.u.mul(&pp.w));
                aww = aww.scale(&F::from_int(2));
                mcoef = F::from_int(2);
            } else {
                mcoef = F::one();
            }
            let g1c = g1c.scale(&F::one().neg());
            let g2c = aww.add_dense(&b.mul(&g1c));
            let mut i2 = zero_series::<F>(n);
            for j in 1..=n {
                let mut acc = Dense::zero();
                conv_acc2(&mut acc, &hs[p], &ys[qq], j);
                if p != qq {
                    conv_acc2(&mut acc, &hs[qq], &ys[p], j);
                }
                let mut mac = Dense::zero();
                conv_acc2(&mut mac, &ms[p], &ys[qq], j);
                let mut sg = finish(acc);
                sg.add_assign(&finish(mac).scale(&mcoef));
                sg.add_assign(&g1c.mul(&gp[1 + e][j]));
                sg.add_assign(&g2c.mul(&gp[2 + e][j]));
                sg.trim();
                let mut ij = sg.integrate(&tab)?;
                ij.trim();
                check(&ij, lim, "order-2 integral")?;
                i2[j] = ij;
            }
            res.psi2.push(((p, qq), pi_series_mul(&y_pi, &pi_series(&i2, side), n)));
            if opt.full {
                xi2.push(series_mul(&y0, &i2, n));
            }
        }
    }
    if opt.full {
        res.xi2 = Some(xi2);
    }
    Ok(res)
}

impl<F: Coeff> Dense<F> {
    pub fn add_dense(&self, o: &Dense<F>) -> Dense<F> {
        let mut r = self.clone();
        r.add_assign(o);
        r
    }

    pub fn sub_dense(&self, o: &Dense<F>) -> Dense<F> {
        let mut r = self.clone();
        r.add_scaled(o, &F::one().neg());
        r
    }
}
