//! Dense storage of θ-Fourier polynomials used by the expansion engine.
//!
//! A [`Dense`] holds every coefficient of `θ^k cos(jθ)`, `θ^k sin(jθ)` for
//! `k ≤ kd`, `j ≤ hd`. Row `k` has `2·hd + 1` slots: slot 0 is the constant,
//! slot `j` is `cos(jθ)` and slot `hd + j` is `sin(jθ)`.

use num_rational::BigRational;

use crate::error::{Error, Result};
use crate::trigcalc::coeff::{int, rat};
use crate::trigcalc::{Basis, Coeff, Side, ThetaFourierPoly, Trig};

#[derive(Clone, Debug, PartialEq)]
pub struct Dense<F> {
    kd: usize,
    hd: usize,
    c: Vec<F>,
}

#[derive(Clone, Copy)]
enum Slot {
    Cos(usize),
    Sin(usize),
}

impl<F: Coeff> Dense<F> {
    pub fn zero() -> Self {
        Dense { kd: 0, hd: 0, c: vec![F::zero()] }
    }

    pub fn with_shape(kd: usize, hd: usize) -> Self {
        Dense { kd, hd, c: vec![F::zero(); (kd + 1) * (2 * hd + 1)] }
    }

    pub fn constant(v: F) -> Self {
        Dense { kd: 0, hd: 0, c: vec![v] }
    }

    pub fn kd(&self) -> usize {
        self.kd
    }

    pub fn hd(&self) -> usize {
        self.hd
    }

    #[inline(always)]
    fn width(&self) -> usize {
        2 * self.hd + 1
    }

    #[inline(always)]
    fn slot(&self, s: usize) -> Slot {
        if s <= self.hd {
            Slot::Cos(s)
        } else {
            Slot::Sin(s - self.hd)
        }
    }

    #[inline(always)]
    fn index(&self, k: usize, s: Slot) -> usize {
        let w = self.width();
        match s {
            Slot::Cos(j) => k * w + j,
            Slot::Sin(j) => k * w + self.hd + j,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.c.iter().all(Coeff::is_zero)
    }

    pub fn get(&self, b: Basis) -> F {
        if b.k as usize > self.kd || b.j as usize > self.hd {
            return F::zero();
        }
        let s = match b.kind {
            Trig::Cos => Slot::Cos(b.j as usize),
            Trig::Sin => Slot::Sin(b.j as usize),
        };
        self.c[self.index(b.k as usize, s)].clone()
    }

    /// Grows the shape so it covers `(kd, hd)`.
    pub fn reshape(&mut self, kd: usize, hd: usize) {
        if kd <= self.kd && hd <= self.hd {
            return;
        }
        let mut out = Dense::with_shape(kd.max(self.kd), hd.max(self.hd));
        for k in 0..=self.kd {
            for s in 0..self.width() {
                let v = &self.c[k * self.width() + s];
                if !v.is_zero() {
                    let i = out.index(k, self.slot(s));
                    out.c[i] = v.clone();
                }
            }
        }
        *self = out;
    }

    /// Shrinks the shape to the nonzero support.
    pub fn trim(&mut self) {
        let w = self.width();
        let mut kmax = 0;
        let mut hmax = 0;
        for k in 0..=self.kd {
            for s in 0..w {
                if !self.c[k * w + s].is_zero() {
                    kmax = kmax.max(k);
                    let j = match self.slot(s) {
                        Slot::Cos(j) | Slot::Sin(j) => j,
                    };
                    hmax = hmax.max(j);
                }
            }
        }
        if kmax == self.kd && hmax == self.hd {
            return;
        }
        let mut out = Dense::with_shape(kmax, hmax);
        for k in 0..=kmax {
            for s in 0..w {
                let v = &self.c[k * w + s];
                if !v.is_zero() {
                    let i = out.index(k, self.slot(s));
                    out.c[i] = v.clone();
                }
            }
        }
        *self = out;
    }

    pub fn add_scaled(&mut self, o: &Dense<F>, f: &F) {
        self.reshape(o.kd, o.hd);
        let w = o.width();
        for k in 0..=o.kd {
            for s in 0..w {
                let v = &o.c[k * w + s];
                if !v.is_zero() {
                    let i = self.index(k, o.slot(s));
                    self.c[i].mul_add_assign(v, f);
                }
            }
        }
    }

    pub fn add_assign(&mut self, o: &Dense<F>) {
        self.reshape(o.kd, o.hd);
        let w = o.width();
        for k in 0..=o.kd {
            for s in 0..w {
                let v = &o.c[k * w + s];
                if !v.is_zero() {
                    let i = self.index(k, o.slot(s));
                    self.c[i].add_assign(v);
                }
            }
        }
    }

    pub fn scale(&self, f: &F) -> Dense<F> {
        Dense { kd: self.kd, hd: self.hd, c: self.c.iter().map(|v| v.mul(f)).collect() }
    }

    fn nonzero(&self) -> Vec<(usize, Slot, F)> {
        let w = self.width();
        let mut v = Vec::new();
        for k in 0..=self.kd {
            for s in 0..w {
                let x = &self.c[k * w + s];
                if !x.is_zero() {
                    v.push((k, self.slot(s), x.clone()));
                }
            }
        }
        v
    }

    /// `self += 2·a·b`, with `self` already shaped to hold the product.
    pub fn mul_acc2(&mut self, a: &Dense<F>, b: &Dense<F>) {
        let an = a.nonzero();
        if an.is_empty() {
            return;
        }
        let bn = b.nonzero();
        if bn.is_empty() {
            return;
        }
        self.reshape(a.kd + b.kd, a.hd + b.hd);
        let w = self.width();
        let hd = self.hd;
        let c = &mut self.c;
        for (ka, sa, va) in &an {
            for (kb, sb, vb) in &bn {
                let v = va.mul(vb);
                let base = (ka + kb) * w;
                match (*sa, *sb) {
                    (Slot::Cos(x), Slot::Cos(y)) => {
                        c[base + x.abs_diff(y)].add_assign(&v);
                        c[base + x + y].add_assign(&v);
                    }
                    (Slot::Sin(x), Slot::Sin(y)) => {
                        c[base + x.abs_diff(y)].add_assign(&v);
                        c[base + x + y].sub_assign(&v);
                    }
                    (Slot::Sin(x), Slot::Cos(y)) | (Slot::Cos(y), Slot::Sin(x)) => {
                        // sin x·cos y = ½[sin(x+y) + sin(x−y)]
                        c[base + hd + x + y].add_assign(&v);
                        if x > y {
                            c[base + hd + x - y].add_assign(&v);
                        } else if y > x {
                            c[base + hd + y - x].sub_assign(&v);
                        }
                    }
                }
            }
        }
    }

    pub fn mul(&self, b: &Dense<F>) -> Dense<F> {
        let mut out = Dense::with_shape(self.kd + b.kd, self.hd + b.hd);
        out.mul_acc2(self, b);
        out.scale(&half())
    }

    /// Antiderivative vanishing at `θ = 0`.
    pub fn integrate(&self, t: &IntTable<F>) -> Result<Dense<F>> {
        if self.kd + 1 >= t.fall.len() || self.hd >= t.inv_pow.len() {
            return Err(Error::CapExceeded(format!(
                "integration of θ-power {} harmonic {} beyond table",
                self.kd, self.hd
            )));
        }
        let mut out = Dense::<F>::with_shape(self.kd + 1, self.hd);
        let w = self.width();
        for k in 0..=self.kd {
            for s in 0..w {
                let v = &self.c[k * w + s];
                if v.is_zero() {
                    continue;
                }
                let (j, is_cos) = match self.slot(s) {
                    Slot::Cos(j) => (j, true),
                    Slot::Sin(j) => (j, false),
                };
                if j == 0 {
                    let i = out.index(k + 1, Slot::Cos(0));
                    out.c[i].mul_add_assign(v, &t.inv_int[k + 1]);
                    continue;
                }
                for m in 0..=k {
                    let coef = v.mul(&t.fall[k][m]).mul(&t.inv_pow[j][m + 1]);
                    // (kind, sign) of the m-th integration-by-parts term
                    let (cos_term, neg) = if is_cos {
                        [(false, false), (true, false), (false, true), (true, true)][m % 4]
                    } else {
                        [(true, true), (false, false), (true, false), (false, true)][m % 4]
                    };
                    let slot = if cos_term { Slot::Cos(j) } else { Slot::Sin(j) };
                    let i = out.index(k - m, slot);
                    if neg {
                        out.c[i].sub_assign(&coef);
                    } else {
                        out.c[i].add_assign(&coef);
                    }
                    if m == k && cos_term {
                        let i0 = out.index(0, Slot::Cos(0));
                        if neg {
                            out.c[i0].add_assign(&coef);
                        } else {
                            out.c[i0].sub_assign(&coef);
                        }
                    }
                }
            }
        }
        Ok(out)
    }

    pub fn derivative(&self) -> Dense<F> {
        let mut out = Dense::<F>::with_shape(self.kd, self.hd);
        let w = self.width();
        for k in 0..=self.kd {
            for s in 0..w {
                let v = &self.c[k * w + s];
                if v.is_zero() {
                    continue;
                }
                let sl = self.slot(s);
                if k > 0 {
                    let i = out.index(k - 1, sl);
                    out.c[i].add_assign(&v.mul(&F::from_int(k as i64)));
                }
                match sl {
                    Slot::Cos(0) => {}
                    Slot::Cos(j) => {
                        let i = out.index(k, Slot::Sin(j));
                        out.c[i].sub_assign(&v.mul(&F::from_int(j as i64)));
                    }
                    Slot::Sin(j) => {
                        let i = out.index(k, Slot::Cos(j));
                        out.c[i].add_assign(&v.mul(&F::from_int(j as i64)));
                    }
                }
            }
        }
        out
    }

    /// Value at `θ = ±π` as coefficients of `π^0, π^1, …`.
    pub fn eval_pi(&self, side: Side) -> Vec<F> {
        let mut out = vec![F::zero(); self.kd + 1];
        let w = self.width();
        for (k, o) in out.iter_mut().enumerate() {
            for j in 0..=self.hd {
                let v = &self.c[k * w + j];
                if v.is_zero() {
                    continue;
                }
                let neg = (j % 2 == 1) ^ (side == Side::Minus && k % 2 == 1);
                if neg {
                    o.sub_assign(v);
                } else {
                    o.add_assign(v);
                }
            }
        }
        out
    }

    pub fn eval_zero(&self) -> F {
        let mut acc = F::zero();
        for j in 0..=self.hd {
            acc.add_assign(&self.c[j]);
        }
        acc
    }

    pub fn from_sparse<C: Coeff>(p: &ThetaFourierPoly<C>, f: impl Fn(&C) -> F) -> Dense<F> {
        let mut out = Dense::with_shape(p.theta_degree() as usize, p.harmonic_degree() as usize);
        for (b, c) in p.terms() {
            let s = match b.kind {
                Trig::Cos => Slot::Cos(b.j as usize),
                Trig::Sin => Slot::Sin(b.j as usize),
            };
            let i = out.index(b.k as usize, s);
            out.c[i] = f(c);
        }
        out
    }

    pub fn to_sparse<C: Coeff>(&self, f: impl Fn(&F) -> C) -> ThetaFourierPoly<C> {
        ThetaFourierPoly::from_terms(self.nonzero().into_iter().map(|(k, s, v)| {
            let b = match s {
                Slot::Cos(j) => Basis::new(k as u32, j as u32, Trig::Cos),
                Slot::Sin(j) => Basis::new(k as u32, j as u32, Trig::Sin),
            };
            (b, f(&v))
        }))
    }
}

pub fn half<F: Coeff>() -> F {
    F::from_rational(&rat(1, 2))
}

/// Constants needed by [`Dense::integrate`], built once per coefficient field.
pub struct IntTable<F> {
    /// `fall[k][m] = k!/(k−m)!`
    fall: Vec<Vec<F>>,
    /// `inv_pow[j][e] = j^{−e}`
    inv_pow: Vec<Vec<F>>,
    /// `inv_int[n] = 1/n`
    inv_int: Vec<F>,
}

impl<F: Coeff> IntTable<F> {
    pub fn new(max_k: usize, max_j: usize) -> Self {
        let fall = (0..=max_k + 1)
            .map(|k| {
                let mut row = Vec::with_capacity(k + 1);
                let mut acc = int(1);
                for m in 0..=k {
                    row.push(F::from_rational(&acc));
                    acc *= int((k - m) as i64);
                }
                row
            })
            .collect();
        let inv_pow = (0..=max_j)
            .map(|j| {
                if j == 0 {
                    return Vec::new();
                }
                let inv = F::from_rational(&BigRational::new(1.into(), (j as i64).into()));
                let mut row = vec![F::one()];
                for e in 1..=max_k + 2 {
                    let next = row[e - 1].mul(&inv);
                    row.push(next);
                }
                row
            })
            .collect();
        let inv_int = (0..=max_k + 2)
            .map(|n| if n == 0 { F::zero() } else { F::from_rational(&rat(1, n as i64)) })
            .collect();
        IntTable { fall, inv_pow, inv_int }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::trigcalc::coeff::rat;

    type Q = BigRational;

    fn sp(terms: &[(u32, u32, Trig, Q)]) -> ThetaFourierPoly<Q> {
        ThetaFourierPoly::from_terms(terms.iter().map(|(k, j, t, c)| (Basis::new(*k, *j, *t), c.clone())))
    }

    #[test]
    fn matches_sparse_kernel() {
        let a = sp(&[(0, 1, Trig::Cos, rat(3, 2)), (1, 2, Trig::Sin, rat(-1, 3)), (0, 0, Trig::Cos, int(2))]);
        let b = sp(&[(0, 3, Trig::Sin, int(5)), (1, 1, Trig::Cos, rat(1, 7)), (2, 0, Trig::Cos, int(-1))]);
        let da = Dense::from_sparse(&a, Q::clone);
        let db = Dense::from_sparse(&b, Q::clone);
        assert_eq!(da.mul(&db).to_sparse(Q::clone), a.mul(&b));
        let t = IntTable::<Q>::new(6, 10);
        assert_eq!(da.mul(&db).integrate(&t).unwrap().to_sparse(Q::clone), a.mul(&b).integrate());
        assert_eq!(db.derivative().to_sparse(Q::clone), b.derivative());
        assert_eq!(da.mul(&db).eval_pi(Side::Minus), {
            let mut v = a.mul(&b).eval_pi_powers(Side::Minus);
            v.resize(4, int(0));
            v
        });
        let mut z = da.mul(&db);
        z.reshape(9, 12);
        z.trim();
        assert_eq!((z.kd(), z.hd()), (3, 5));
    }
}
