//! Taylor-series integration of planar quadratic vector fields with event
//! location on a line through the origin.
//!
//! For a polynomial field the Taylor coefficients of the solution follow
//! from Cauchy products, so a high-order step costs `O(order²)` and the
//! local polynomial doubles as dense output for root finding. The scalar
//! type is generic: `f64` for routine work and [`Fixed`] when the quantity
//! of interest sits far below double precision.

use std::fmt::Debug;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::trigcalc::coeff::rational_to_f64;

/// Scalar arithmetic the integrator needs.
pub trait Real:
    Clone
    + Debug
    + PartialOrd
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    fn from_f64(v: f64) -> Self;
    fn from_rational(q: &BigRational) -> Self;
    fn to_f64(&self) -> f64;
    /// Unit roundoff, relative to values of order one.
    fn epsilon() -> f64;

    fn zero() -> Self {
        Self::from_f64(0.0)
    }
}

impl Real for f64 {
    fn epsilon() -> f64 {
        f64::EPSILON
    }
    fn from_f64(v: f64) -> Self {
        v
    }
    fn from_rational(q: &BigRational) -> Self {
        rational_to_f64(q)
    }
    fn to_f64(&self) -> f64 {
        *self
    }
}

/// Binary fixed point with `P` fractional bits: the value is `raw · 2^−P`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct Fixed<const P: u32>(BigInt);

/// 256 fractional bits, about 77 decimal digits.
pub type Fixed256 = Fixed<256>;

impl<const P: u32> Fixed<P> {
    pub fn raw(&self) -> &BigInt {
        &self.0
    }
}

impl<const P: u32> Add for Fixed<P> {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Fixed(self.0 + o.0)
    }
}

impl<const P: u32> Sub for Fixed<P> {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Fixed(self.0 - o.0)
    }
}

impl<const P: u32> Mul for Fixed<P> {
    type Output = Self;
    fn mul(self, o: Self) -> Self {
        Fixed((self.0 * o.0) >> P)
    }
}

impl<const P: u32> Div for Fixed<P> {
    type Output = Self;
    fn div(self, o: Self) -> Self {
        assert!(!o.0.is_zero(), "fixed-point division by zero");
        Fixed((self.0 << P) / o.0)
    }
}

impl<const P: u32> Neg for Fixed<P> {
    type Output = Self;
    fn neg(self) -> Self {
        Fixed(-self.0)
    }
}

impl<const P: u32> Real for Fixed<P> {
    fn epsilon() -> f64 {
        (-(P as f64)).exp2()
    }

    fn from_f64(v: f64) -> Self {
        assert!(v.is_finite(), "non-finite value {v}");
        if v == 0.0 {
            return Fixed(BigInt::zero());
        }
        let bits = v.to_bits();
        let exp = ((bits >> 52) & 0x7ff) as i64;
        let frac = bits & ((1u64 << 52) - 1);
        let (m, e) = if exp == 0 { (frac, -1074) } else { (frac | (1u64 << 52), exp - 1075) };
        let m = if v < 0.0 { -BigInt::from(m) } else { BigInt::from(m) };
        let shift = e + P as i64;
        Fixed(if shift >= 0 { m << shift as usize } else { m >> (-shift) as usize })
    }

    fn from_rational(q: &BigRational) -> Self {
        Fixed((q.numer() << P) / q.denom())
    }

    fn to_f64(&self) -> f64 {
        // Keep the leading 64 bits so the conversion never overflows.
        let bits = self.0.bits();
        let drop = bits.saturating_sub(64);
        let top = (&self.0 >> drop).to_f64().unwrap_or(0.0);
        top * (drop as f64 - P as f64).exp2()
    }
}

/// `X(x, y) = c0 + c1 x + c2 y + c3 x² + c4 xy + c5 y²`, likewise for `Y`.
#[derive(Clone, Debug, PartialEq)]
pub struct QuadField<R = f64> {
    pub x: [R; 6],
    pub y: [R; 6],
}

impl<R: Real> QuadField<R> {
    pub fn eval(&self, p: &[R; 2]) -> [R; 2] {
        let m = [
            R::from_f64(1.0),
            p[0].clone(),
            p[1].clone(),
            p[0].clone() * p[0].clone(),
            p[0].clone() * p[1].clone(),
            p[1].clone() * p[1].clone(),
        ];
        let dot = |c: &[R; 6]| c.iter().zip(&m).fold(R::zero(), |acc, (a, b)| acc + a.clone() * b.clone());
        [dot(&self.x), dot(&self.y)]
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TaylorOptions {
    pub order: usize,
    pub atol: f64,
    pub rtol: f64,
    /// Give up after this much elapsed time.
    pub max_time: f64,
    /// Give up when the state leaves this disc.
    pub escape_radius: f64,
}

impl Default for TaylorOptions {
    fn default() -> Self {
        TaylorOptions { order: 24, atol: 1e-12, rtol: 1e-12, max_time: 200.0, escape_radius: 5.0 }
    }
}

impl TaylorOptions {
    /// Settings matched to [`Fixed256`]: tolerance `10⁻⁵⁵` and the order
    /// that makes that tolerance cheapest.
    pub fn extended() -> Self {
        TaylorOptions { order: 64, atol: 1e-55, rtol: 1e-55, ..Default::default() }
    }
}

/// Taylor coefficients of the solution through `p` up to `order`.
pub fn series<R: Real>(f: &QuadField<R>, p: &[R; 2], order: usize) -> (Vec<R>, Vec<R>) {
    let mut x = vec![R::zero(); order + 1];
    let mut y = vec![R::zero(); order + 1];
    x[0] = p[0].clone();
    y[0] = p[1].clone();
    for k in 0..order {
        let (mut xx, mut xy, mut yy) = (R::zero(), R::zero(), R::zero());
        for i in 0..=k {
            xx = xx + x[i].clone() * x[k - i].clone();
            xy = xy + x[i].clone() * y[k - i].clone();
            yy = yy + y[i].clone() * y[k - i].clone();
        }
        let c = if k == 0 { R::from_f64(1.0) } else { R::zero() };
        let rhs = |a: &[R; 6]| {
            a[0].clone() * c.clone()
                + a[1].clone() * x[k].clone()
                + a[2].clone() * y[k].clone()
                + a[3].clone() * xx.clone()
                + a[4].clone() * xy.clone()
                + a[5].clone() * yy.clone()
        };
        let (dx, dy) = (rhs(&f.x), rhs(&f.y));
        let kk = R::from_f64((k + 1) as f64);
        x[k + 1] = dx / kk.clone();
        y[k + 1] = dy / kk;
    }
    (x, y)
}

fn horner<R: Real>(c: &[R], t: &R) -> R {
    c.iter().rev().fold(R::zero(), |acc, v| acc * t.clone() + v.clone())
}

fn horner_d<R: Real>(c: &[R], t: &R) -> R {
    c.iter()
        .enumerate()
        .skip(1)
        .rev()
        .fold(R::zero(), |acc, (k, v)| acc * t.clone() + R::from_f64(k as f64) * v.clone())
}

/// Step length from the last two coefficients (Jorba–Zou control).
fn step_length<R: Real>(x: &[R], y: &[R], tol: f64) -> f64 {
    let p = x.len() - 1;
    let norm = |k: usize| x[k].to_f64().abs().max(y[k].to_f64().abs());
    let mut h = f64::INFINITY;
    for k in [p - 1, p] {
        let n = norm(k);
        if n > 0.0 {
            h = h.min((tol / n).powf(1.0 / k as f64));
        }
    }
    if h.is_finite() {
        0.9 * h
    } else {
        1.0
    }
}

/// Where and how a trajectory met the line.
#[derive(Clone, Debug, PartialEq)]
pub struct Crossing<R = f64> {
    pub point: [R; 2],
    pub time: f64,
    /// `d/dt (n · p)` at the crossing, in forward time.
    pub normal_speed: f64,
}

/// Integrates from `p0` (on the line `n · p = 0`) in the time direction
/// `dir = ±1` until the trajectory returns to the line from the side with
/// sign `side` of `n · p`.
pub fn integrate_to_line<R: Real>(
    f: &QuadField<R>,
    p0: &[R; 2],
    dir: f64,
    n: &[R; 2],
    side: f64,
    opt: &TaylorOptions,
) -> Result<Crossing<R>> {
    let g = |p: &[R; 2]| n[0].clone() * p[0].clone() + n[1].clone() * p[1].clone();
    let v0 = f.eval(p0);
    let leave = dir * g(&v0).to_f64() * side;
    let scale = p0[0].to_f64().hypot(p0[1].to_f64()).max(1e-300);
    if leave <= 1e-12 * scale {
        return Err(Error::Integration(format!(
            "the flow does not leave the line into the chosen half-plane (normal speed {:.3e}); sliding or tangency",
            g(&v0).to_f64()
        )));
    }
    let rdir = R::from_f64(dir);
    let mut p = p0.clone();
    let mut t = 0.0;
    let mut first = true;
    while t < opt.max_time {
        let (cx, cy) = series(f, &p, opt.order);
        let tol = opt.atol.max(opt.rtol * p[0].to_f64().hypot(p[1].to_f64()));
        let h = step_length(&cx, &cy, tol);
        let gc: Vec<R> =
            cx.iter().zip(&cy).map(|(a, b)| n[0].clone() * a.clone() + n[1].clone() * b.clone()).collect();
        // The event polynomial in local time s = dir·τ, τ ∈ [0, h].
        let ge = |s: f64| horner(&gc, &R::from_f64(dir * s)).to_f64();
        const SAMPLES: usize = 16;
        let mut prev = if first { None } else { Some(0.0) };
        for i in 1..=SAMPLES {
            let s = h * i as f64 / SAMPLES as f64;
            let v = ge(s) * side;
            if first && i == 1 && v <= 0.0 {
                return Err(Error::Integration("trajectory re-crossed immediately; step too coarse near the line".into()));
            }
            if v <= 0.0 {
                let lo = prev.expect("sign change needs a previous sample");
                let root = refine(&gc, &rdir, lo, s);
                let tau = rdir.clone() * root.clone();
                let point = [horner(&cx, &tau), horner(&cy, &tau)];
                let slope = n[0].clone() * horner_d(&cx, &tau) + n[1].clone() * horner_d(&cy, &tau);
                return Ok(Crossing { point, time: t + root.to_f64(), normal_speed: slope.to_f64() });
            }
            prev = Some(s);
        }
        first = false;
        let th = R::from_f64(dir * h);
        p = [horner(&cx, &th), horner(&cy, &th)];
        t += h;
        let (px, py) = (p[0].to_f64(), p[1].to_f64());
        if !(px.is_finite() && py.is_finite()) || px.hypot(py) > opt.escape_radius {
            return Err(Error::Integration(format!("trajectory escaped the disc of radius {}", opt.escape_radius)));
        }
    }
    Err(Error::Integration(format!("no return to the line within time {}", opt.max_time)))
}

/// Root of the event polynomial in `[lo, hi]` by safeguarded Newton.
fn refine<R: Real>(gc: &[R], dir: &R, lo: f64, hi: f64) -> R {
    let g = |s: &R| horner(gc, &(dir.clone() * s.clone()));
    let (mut lo, mut hi) = (R::from_f64(lo), R::from_f64(hi));
    let zero = R::zero();
    let lo_positive = g(&lo) > zero;
    let half = R::from_f64(0.5);
    let mut s = (lo.clone() + hi.clone()) * half.clone();
    for _ in 0..400 {
        let v = g(&s);
        if v == zero {
            return s;
        }
        if (v > zero) == lo_positive {
            lo = s.clone();
        } else {
            hi = s.clone();
        }
        let d = dir.clone() * horner_d(gc, &(dir.clone() * s.clone()));
        s = if d != zero {
            let newton = s.clone() - v / d;
            if newton > lo && newton < hi {
                newton
            } else {
                (lo.clone() + hi.clone()) * half.clone()
            }
        } else {
            (lo.clone() + hi.clone()) * half.clone()
        };
        let width = (hi.clone() - lo.clone()).to_f64();
        if width <= 4.0 * R::epsilon() * hi.to_f64().abs().max(1e-300) {
            break;
        }
    }
    s
}
