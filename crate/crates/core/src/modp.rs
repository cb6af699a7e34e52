//! Word-sized prime fields in Montgomery form, Chinese remaindering and
//! rational reconstruction.
//!
//! The active modulus lives in a thread-local so that [`Fp`] values stay one
//! machine word and can implement [`Coeff`]. Every computation must run inside
//! [`with_modulus`].

use std::cell::Cell;
use std::fmt;

use num_bigint::{BigInt, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::trigcalc::coeff::q0;
use crate::trigcalc::Coeff;

/// Primes just below 2^62, in the order they are used.
pub const PRIMES: [u64; 32] = [
    4611686018427387847,
    4611686018427387817,
    4611686018427387787,
    4611686018427387761,
    4611686018427387751,
    4611686018427387737,
    4611686018427387733,
    4611686018427387709,
    4611686018427387701,
    4611686018427387631,
    4611686018427387617,
    4611686018427387587,
    4611686018427387461,
    4611686018427387421,
    4611686018427387409,
    4611686018427387329,
    4611686018427387323,
    4611686018427387301,
    4611686018427387271,
    4611686018427387241,
    4611686018427387139,
    4611686018427387131,
    4611686018427387127,
    4611686018427387113,
    4611686018427387091,
    4611686018427387073,
    4611686018427386981,
    4611686018427386923,
    4611686018427386911,
    4611686018427386903,
    4611686018427386897,
    4611686018427386887,
];

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
struct Modulus {
    p: u64,
    /// `-p^{-1} mod 2^64`
    pinv: u64,
    /// `2^64 mod p`
    r1: u64,
    /// `2^128 mod p`
    r2: u64,
}

impl Modulus {
    const UNSET: Modulus = Modulus { p: 0, pinv: 0, r1: 0, r2: 0 };

    fn new(p: u64) -> Modulus {
        assert!(p % 2 == 1 && p < (1 << 62), "modulus must be an odd prime below 2^62");
        let mut inv: u64 = 1;
        for _ in 0..7 {
            inv = inv.wrapping_mul(2u64.wrapping_sub(p.wrapping_mul(inv)));
        }
        let r1 = ((1u128 << 64) % p as u128) as u64;
        let r2 = ((r1 as u128 * r1 as u128) % p as u128) as u64;
        Modulus { p, pinv: inv.wrapping_neg(), r1, r2 }
    }
}

thread_local! {
    static ACTIVE: Cell<Modulus> = const { Cell::new(Modulus::UNSET) };
}

#[inline(always)]
fn active() -> Modulus {
    ACTIVE.with(Cell::get)
}

struct Restore(Modulus);

impl Drop for Restore {
    fn drop(&mut self) {
        ACTIVE.with(|c| c.set(self.0));
    }
}

/// Runs `f` with arithmetic in [`Fp`] taken modulo `p`.
pub fn with_modulus<T>(p: u64, f: impl FnOnce() -> T) -> T {
    let prev = ACTIVE.with(|c| c.replace(Modulus::new(p)));
    let _restore = Restore(prev);
    f()
}

pub fn active_prime() -> u64 {
    active().p
}

#[inline(always)]
fn redc(t: u128, m: &Modulus) -> u64 {
    let k = (t as u64).wrapping_mul(m.pinv);
    let u = ((t + k as u128 * m.p as u128) >> 64) as u64;
    if u >= m.p {
        u - m.p
    } else {
        u
    }
}

/// Element of the active prime field, stored in Montgomery form.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct Fp(u64);

impl Fp {
    pub fn from_u64(x: u64) -> Fp {
        let m = active();
        Fp(redc((x % m.p) as u128 * m.r2 as u128, &m))
    }

    pub fn from_bigint(n: &BigInt) -> Fp {
        let m = active();
        let r = (n.abs() % m.p).to_u64().expect("reduced below modulus");
        let v = Fp::from_u64(r);
        if n.sign() == Sign::Minus {
            v.neg()
        } else {
            v
        }
    }

    /// Canonical representative in `[0, p)`.
    pub fn value(self) -> u64 {
        let m = active();
        redc(self.0 as u128, &m)
    }

    pub fn pow_u64(self, mut e: u64) -> Fp {
        let mut base = self;
        let mut acc = <Fp as Coeff>::one();
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base);
            }
            base = base.mul(&base);
            e >>= 1;
        }
        acc
    }

    pub fn inv(self) -> Fp {
        assert!(self.0 != 0, "inverse of zero modulo p");
        self.pow_u64(active().p - 2)
    }
}

impl fmt::Debug for Fp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.value())
    }
}

impl Coeff for Fp {
    #[inline(always)]
    fn zero() -> Self {
        Fp(0)
    }
    #[inline(always)]
    fn one() -> Self {
        Fp(active().r1)
    }
    #[inline(always)]
    fn is_zero(&self) -> bool {
        self.0 == 0
    }
    #[inline(always)]
    fn add(&self, rhs: &Self) -> Self {
        let p = active().p;
        let s = self.0 + rhs.0;
        Fp(if s >= p { s - p } else { s })
    }
    #[inline(always)]
    fn sub(&self, rhs: &Self) -> Self {
        if self.0 >= rhs.0 {
            Fp(self.0 - rhs.0)
        } else {
            Fp(self.0 + active().p - rhs.0)
        }
    }
    #[inline(always)]
    fn mul(&self, rhs: &Self) -> Self {
        let m = active();
        Fp(redc(self.0 as u128 * rhs.0 as u128, &m))
    }
    #[inline(always)]
    fn neg(&self) -> Self {
        if self.0 == 0 {
            *self
        } else {
            Fp(active().p - self.0)
        }
    }
    fn from_rational(q: &BigRational) -> Self {
        Fp::from_bigint(q.numer()).mul(&Fp::from_bigint(q.denom()).inv())
    }
    fn from_int(n: i64) -> Self {
        let v = Fp::from_u64(n.unsigned_abs());
        if n < 0 {
            v.neg()
        } else {
            v
        }
    }
}

/// Rational `n/d` with `|n|, d ≤ sqrt(M/2)` congruent to `a` modulo `M`.
pub fn rational_reconstruct(a: &BigInt, m: &BigInt) -> Option<BigRational> {
    let bound = (m / 2u32).sqrt();
    let (mut r0, mut r1) = (m.clone(), a.mod_floor(m));
    let (mut t0, mut t1) = (BigInt::zero(), BigInt::one());
    while r1 > bound {
        let q = &r0 / &r1;
        let r2 = &r0 - &q * &r1;
        let t2 = &t0 - &q * &t1;
        r0 = std::mem::replace(&mut r1, r2);
        t0 = std::mem::replace(&mut t1, t2);
    }
    if t1.is_zero() || t1.abs() > bound {
        return None;
    }
    let q = BigRational::new(r1, t1);
    // the reconstruction must be consistent with the residue
    let check = (q.numer() - a * q.denom()).mod_floor(m);
    if !check.is_zero() {
        return None;
    }
    Some(q)
}

/// Combines residues of one value modulo the given primes.
pub fn crt(residues: &[u64], primes: &[u64]) -> (BigInt, BigInt) {
    let mut a = BigInt::zero();
    let mut m = BigInt::one();
    for (&r, &p) in residues.iter().zip(primes) {
        let pb = BigInt::from(p);
        let am = (&a % &pb).to_u64().expect("reduced");
        let mm = (&m % &pb).to_u64().expect("reduced");
        let inv = mod_inverse_u64(mm, p);
        let diff = (r as u128 + p as u128 - am as u128) % p as u128;
        let k = (diff * inv as u128 % p as u128) as u64;
        a += &m * k;
        m *= &pb;
    }
    (a, m)
}

fn mod_inverse_u64(a: u64, p: u64) -> u64 {
    let (mut t, mut newt) = (0i128, 1i128);
    let (mut r, mut newr) = (p as i128, a as i128);
    while newr != 0 {
        let q = r / newr;
        (t, newt) = (newt, t - q * newt);
        (r, newr) = (newr, r - q * newr);
    }
    if t < 0 {
        t += p as i128;
    }
    t as u64
}

/// Reduces a rational modulo `p`; `None` when `p` divides the denominator.
pub fn rational_mod(q: &BigRational, p: u64) -> Option<u64> {
    let pb = BigInt::from(p);
    let d = q.denom().mod_floor(&pb).to_u64()?;
    if d == 0 {
        return None;
    }
    let n = q.numer().mod_floor(&pb).to_u64()?;
    Some((n as u128 * mod_inverse_u64(d, p) as u128 % p as u128) as u64)
}

/// Recovers exact rationals from images modulo several primes.
///
/// `compute(p)` must return the canonical residues of the same vector of
/// rationals modulo `p`. Primes are added until a reconstruction from all but
/// the last prime is confirmed by the last one.
pub fn reconstruct_adaptive(
    initial: usize,
    compute: impl Fn(u64) -> Result<Vec<u64>>,
) -> Result<Vec<BigRational>> {
    let mut images: Vec<Vec<u64>> = Vec::new();
    let mut want = initial.clamp(2, PRIMES.len());
    loop {
        while images.len() < want {
            images.push(compute(PRIMES[images.len()])?);
        }
        let n = images[0].len();
        if images.iter().any(|v| v.len() != n) {
            return Err(Error::Structural("modular images have different shapes".into()));
        }
        let used = &PRIMES[..want - 1];
        let check = PRIMES[want - 1];
        let mut out = Vec::with_capacity(n);
        let mut ok = true;
        for i in 0..n {
            let residues: Vec<u64> = images[..want - 1].iter().map(|v| v[i]).collect();
            if residues.iter().all(|&r| r == 0) && images[want - 1][i] == 0 {
                out.push(q0());
                continue;
            }
            let (a, m) = crt(&residues, used);
            match rational_reconstruct(&a, &m) {
                Some(q) if rational_mod(&q, check) == Some(images[want - 1][i]) => out.push(q),
                _ => {
                    ok = false;
                    break;
                }
            }
        }
        if ok {
            return Ok(out);
        }
        if want == PRIMES.len() {
            return Err(Error::NoConvergence(format!(
                "rational reconstruction failed with {} primes",
                PRIMES.len()
            )));
        }
        want = (want * 2).min(PRIMES.len());
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::trigcalc::rat;

    #[test]
    fn field_arithmetic() {
        with_modulus(PRIMES[0], || {
            let a = Fp::from_int(-7);
            let b = Fp::from_rational(&rat(3, 5));
            let c = a.mul(&b).add(&Fp::from_rational(&rat(21, 5)));
            assert!(c.is_zero());
            assert_eq!(b.mul(&b.inv()), Fp::one());
            assert_eq!(Fp::from_u64(12345).value(), 12345);
        });
    }

    #[test]
    fn reconstruct_big_rational() {
        let q = BigRational::new(
            "-13061776996188618752".parse().unwrap(),
            "2780914306640625".parse().unwrap(),
        );
        let vals = vec![q.clone(), rat(0, 1), rat(-3584, 125)];
        let out = reconstruct_adaptive(3, |p| Ok(vals.iter().map(|v| rational_mod(v, p).unwrap()).collect())).unwrap();
        assert_eq!(out, vals);
    }

    #[test]
    fn modulus_is_restored() {
        with_modulus(PRIMES[0], || {
            with_modulus(PRIMES[1], || assert_eq!(active_prime(), PRIMES[1]));
            assert_eq!(active_prime(), PRIMES[0]);
        });
    }
}
