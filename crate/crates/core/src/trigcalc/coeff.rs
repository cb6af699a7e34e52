use std::fmt::Debug;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Commutative ring with an embedding of the rationals.
///
/// Every coefficient type used by the expansion machinery implements this:
/// exact rationals, π-polynomials, parameter polynomials, residues modulo a
/// word-sized prime, and the ring of polynomials in `(cos α, sin α)`.
pub trait Coeff: Clone + PartialEq + Debug + Send + Sync + 'static {
    fn zero() -> Self;
    fn one() -> Self;
    fn is_zero(&self) -> bool;
    fn add(&self, rhs: &Self) -> Self;
    fn sub(&self, rhs: &Self) -> Self;
    fn mul(&self, rhs: &Self) -> Self;
    fn neg(&self) -> Self;
    fn from_rational(q: &BigRational) -> Self;

    fn from_int(n: i64) -> Self {
        Self::from_rational(&BigRational::from_integer(BigInt::from(n)))
    }

    fn add_assign(&mut self, rhs: &Self) {
        *self = self.add(rhs);
    }

    fn sub_assign(&mut self, rhs: &Self) {
        *self = self.sub(rhs);
    }

    /// `self += a * b`
    fn mul_add_assign(&mut self, a: &Self, b: &Self) {
        let p = a.mul(b);
        self.add_assign(&p);
    }

    fn pow(&self, e: u32) -> Self {
        let mut acc = Self::one();
        for _ in 0..e {
            acc = acc.mul(self);
        }
        acc
    }
}

impl Coeff for BigRational {
    fn zero() -> Self {
        Zero::zero()
    }
    fn one() -> Self {
        One::one()
    }
    fn is_zero(&self) -> bool {
        Zero::is_zero(self)
    }
    fn add(&self, rhs: &Self) -> Self {
        self + rhs
    }
    fn sub(&self, rhs: &Self) -> Self {
        self - rhs
    }
    fn mul(&self, rhs: &Self) -> Self {
        self * rhs
    }
    fn neg(&self) -> Self {
        -self
    }
    fn from_rational(q: &BigRational) -> Self {
        q.clone()
    }
    fn add_assign(&mut self, rhs: &Self) {
        *self += rhs;
    }
    fn sub_assign(&mut self, rhs: &Self) {
        *self -= rhs;
    }
}

pub fn q0() -> BigRational {
    <BigRational as Zero>::zero()
}

pub fn q1() -> BigRational {
    <BigRational as One>::one()
}

pub fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

pub fn int(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

/// Formats a rational as `"p/q"`, or `"p"` when the denominator is one.
pub fn format_rational(q: &BigRational) -> String {
    if q.denom().is_one() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

/// Parses `"p/q"`, `"p"`, or a finite decimal such as `"-0.25"`.
pub fn parse_rational(s: &str) -> Result<BigRational> {
    let s = s.trim();
    let bad = || Error::Parse(format!("not an exact rational: {s:?}"));
    if let Some((n, d)) = s.split_once('/') {
        let n: BigInt = n.trim().parse().map_err(|_| bad())?;
        let d: BigInt = d.trim().parse().map_err(|_| bad())?;
        if d.is_zero() {
            return Err(Error::Parse(format!("zero denominator in {s:?}")));
        }
        return Ok(BigRational::new(n, d));
    }
    if let Some((ip, fp)) = s.split_once('.') {
        let neg = ip.starts_with('-');
        let digits = format!("{}{}", ip.trim_start_matches(['-', '+']), fp);
        let n: BigInt = digits.parse().map_err(|_| bad())?;
        let d = num_traits::pow(BigInt::from(10), fp.len());
        let q = BigRational::new(n, d);
        return Ok(if neg { -q } else { q });
    }
    let n: BigInt = s.parse().map_err(|_| bad())?;
    Ok(BigRational::from_integer(n))
}

/// Nearest `f64` to a big rational, robust to huge numerators and denominators.
pub fn rational_to_f64(q: &BigRational) -> f64 {
    if let (Some(n), Some(d)) = (q.numer().to_f64(), q.denom().to_f64()) {
        if n.is_finite() && d.is_finite() && d != 0.0 {
            return n / d;
        }
    }
    let nb = q.numer().bits() as i64;
    let db = q.denom().bits() as i64;
    let shift = nb - db - 60;
    let scaled = if shift >= 0 {
        q.numer() / (q.denom() << shift as usize)
    } else {
        (q.numer() << (-shift) as usize) / q.denom()
    };
    scaled.to_f64().unwrap_or(f64::NAN) * 2f64.powi(shift as i32)
}

/// Exact rational equal to a finite `f64`.
pub fn f64_to_rational(x: f64) -> BigRational {
    BigRational::from_float(x).unwrap_or_else(q0)
}

/// Rounds `q` to `digits` significant decimal digits.
pub fn round_significant(q: &BigRational, digits: u32) -> BigRational {
    if Zero::is_zero(q) {
        return q.clone();
    }
    let unit = pow10(decimal_exponent(q) - digits as i64 + 1);
    (q / &unit).round() * unit
}

/// Decimal exponent `e` with `10^e ≤ |q| < 10^(e+1)`; `q` must be nonzero.
pub fn decimal_exponent(q: &BigRational) -> i64 {
    let mag = q.abs();
    let approx = rational_to_f64(&mag);
    let mut e: i64 = if approx.is_finite() && approx > 0.0 {
        approx.log10().floor() as i64
    } else {
        // Outside the f64 range: estimate from the digit counts.
        mag.numer().to_string().len() as i64 - mag.denom().to_string().len() as i64
    };
    while mag >= pow10(e + 1) {
        e += 1;
    }
    while mag < pow10(e) {
        e -= 1;
    }
    e
}

fn pow10(k: i64) -> BigRational {
    let ten = BigRational::from_integer(BigInt::from(10));
    if k >= 0 {
        num_traits::pow(ten, k as usize)
    } else {
        num_traits::pow(ten, (-k) as usize).recip()
    }
}

/// Scientific notation with `digits` significant digits, e.g. `-1.8623e4`.
pub fn format_scientific(q: &BigRational, digits: u32) -> String {
    if Zero::is_zero(q) {
        return "0".to_string();
    }
    let digits = digits.max(1);
    let mut e = decimal_exponent(q);
    let mut m = (q.abs() / pow10(e - digits as i64 + 1)).round().to_integer();
    if m.to_string().len() > digits as usize {
        e += 1;
        m = (q.abs() / pow10(e - digits as i64 + 1)).round().to_integer();
    }
    let s = m.to_string();
    let sign = if q.is_negative() { "-" } else { "" };
    if s.len() == 1 {
        format!("{sign}{s}e{e}")
    } else {
        format!("{sign}{}.{}e{e}", &s[..1], &s[1..])
    }
}

/// Rational approximation of π good to about 100 decimal digits.
pub fn pi_rational() -> BigRational {
    let digits = "31415926535897932384626433832795028841971693993751058209749445923078164062862089986280348253421170679";
    let n: BigInt = digits.parse().expect("constant");
    BigRational::new(n, num_traits::pow(BigInt::from(10), digits.len() - 1))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_format() {
        assert_eq!(parse_rational("6/8").unwrap(), rat(3, 4));
        assert_eq!(parse_rational("-1").unwrap(), int(-1));
        assert_eq!(parse_rational("-0.25").unwrap(), rat(-1, 4));
        assert_eq!(format_rational(&rat(-3, 4)), "-3/4");
        assert_eq!(format_rational(&int(5)), "5");
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("x").is_err());
        assert_eq!(format_scientific(&rat(-186225781, 10000), 4), "-1.862e4");
        assert_eq!(format_scientific(&rat(9996, 10000), 3), "1.00e0");
        assert_eq!(format_scientific(&int(7), 1), "7e0");
        assert_eq!(round_significant(&rat(12345, 1000), 2), rat(12, 1));
    }

    #[test]
    fn huge_rational_to_float() {
        let q = BigRational::new(
            "13061776996188618752".parse().unwrap(),
            "2780914306640625".parse().unwrap(),
        );
        assert!((rational_to_f64(&q) - 4696.9).abs() < 0.1);
        let big = BigRational::new(num_traits::pow(BigInt::from(10), 400), num_traits::pow(BigInt::from(10), 398));
        assert!((rational_to_f64(&big) - 100.0).abs() < 1e-9);
    }

    #[test]
    fn significant_rounding() {
        assert_eq!(round_significant(&rat(-17554321, 1), 4), int(-17550000));
        assert_eq!(round_significant(&rat(8838, 10000), 3), rat(884, 1000));
    }
}
