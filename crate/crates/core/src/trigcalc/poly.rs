use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use num_rational::BigRational;

use super::coeff::Coeff;
use super::pipoly::PiPoly;
use super::symbol::Symbol;

/// Product of symbols with positive exponents, sorted by symbol.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Debug)]
pub struct Monomial(Vec<(Symbol, u32)>);

impl Monomial {
    pub fn one() -> Self {
        Monomial(Vec::new())
    }

    pub fn var(s: Symbol) -> Self {
        Monomial(vec![(s, 1)])
    }

    pub fn from_pairs(mut pairs: Vec<(Symbol, u32)>) -> Self {
        pairs.retain(|&(_, e)| e > 0);
        pairs.sort_by_key(|p| p.0);
        let mut out: Vec<(Symbol, u32)> = Vec::with_capacity(pairs.len());
        for (s, e) in pairs {
            match out.last_mut() {
                Some(last) if last.0 == s => last.1 += e,
                _ => out.push((s, e)),
            }
        }
        Monomial(out)
    }

    pub fn pairs(&self) -> &[(Symbol, u32)] {
        &self.0
    }

    pub fn is_one(&self) -> bool {
        self.0.is_empty()
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().map(|&(_, e)| e).sum()
    }

    /// Degree counting only the perturbation coefficients.
    pub fn pert_degree(&self) -> u32 {
        self.0.iter().filter(|(s, _)| s.is_perturbation()).map(|&(_, e)| e).sum()
    }

    pub fn exponent(&self, s: Symbol) -> u32 {
        self.0.iter().find(|(t, _)| *t == s).map_or(0, |&(_, e)| e)
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        let (a, b) = (&self.0, &other.0);
        let mut out = Vec::with_capacity(a.len() + b.len());
        let (mut i, mut j) = (0, 0);
        while i < a.len() && j < b.len() {
            match a[i].0.cmp(&b[j].0) {
                std::cmp::Ordering::Less => {
                    out.push(a[i]);
                    i += 1;
                }
                std::cmp::Ordering::Greater => {
                    out.push(b[j]);
                    j += 1;
                }
                std::cmp::Ordering::Equal => {
                    out.push((a[i].0, a[i].1 + b[j].1));
                    i += 1;
                    j += 1;
                }
            }
        }
        out.extend_from_slice(&a[i..]);
        out.extend_from_slice(&b[j..]);
        Monomial(out)
    }

    /// The monomial with `s` removed entirely.
    pub fn without(&self, s: Symbol) -> Monomial {
        Monomial(self.0.iter().copied().filter(|(t, _)| *t != s).collect())
    }
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "1");
        }
        for (i, (s, e)) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, "*")?;
            }
            if *e == 1 {
                write!(f, "{s}")?;
            } else {
                write!(f, "{s}^{e}")?;
            }
        }
        Ok(())
    }
}

/// Sparse multivariate polynomial; zero coefficients are never stored.
#[derive(Clone, PartialEq, Default)]
pub struct Poly<C> {
    terms: BTreeMap<Monomial, C>,
}

/// Polynomial in the perturbation and analysis symbols with coefficients in `Q[π]`.
pub type ParamPoly = Poly<PiPoly>;

impl<C: Coeff> Poly<C> {
    pub fn zero() -> Self {
        Poly { terms: BTreeMap::new() }
    }

    pub fn constant(c: C) -> Self {
        Self::term(Monomial::one(), c)
    }

    pub fn var(s: Symbol) -> Self {
        Self::term(Monomial::var(s), C::one())
    }

    pub fn term(m: Monomial, c: C) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(m, c);
        }
        Poly { terms }
    }

    pub fn from_terms(it: impl IntoIterator<Item = (Monomial, C)>) -> Self {
        let mut p = Self::zero();
        for (m, c) in it {
            p.add_term(m, &c);
        }
        p
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &C)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coeff(&self, m: &Monomial) -> C {
        self.terms.get(m).cloned().unwrap_or_else(C::zero)
    }

    pub fn add_term(&mut self, m: Monomial, c: &C) {
        if c.is_zero() {
            return;
        }
        match self.terms.get_mut(&m) {
            Some(v) => {
                v.add_assign(c);
                if v.is_zero() {
                    self.terms.remove(&m);
                }
            }
            None => {
                self.terms.insert(m, c.clone());
            }
        }
    }

    pub fn scale(&self, c: &C) -> Self {
        Poly::from_terms(self.terms.iter().map(|(m, v)| (m.clone(), v.mul(c))))
    }

    pub fn mul_monomial(&self, m: &Monomial) -> Self {
        Poly { terms: self.terms.iter().map(|(k, v)| (k.mul(m), v.clone())).collect() }
    }

    pub fn total_degree(&self) -> Option<u32> {
        self.terms.keys().map(Monomial::degree).max()
    }

    pub fn degree_in(&self, s: Symbol) -> u32 {
        self.terms.keys().map(|m| m.exponent(s)).max().unwrap_or(0)
    }

    /// True when every monomial has perturbation degree exactly `d`.
    pub fn is_homogeneous_pert(&self, d: u32) -> bool {
        self.terms.keys().all(|m| m.pert_degree() == d)
    }

    pub fn symbols(&self) -> BTreeSet<Symbol> {
        self.terms.keys().flat_map(|m| m.pairs().iter().map(|&(s, _)| s)).collect()
    }

    /// Terms whose exponent of `s` is exactly `k`, with `s` removed.
    pub fn coeff_of_power(&self, s: Symbol, k: u32) -> Self {
        Poly::from_terms(
            self.terms
                .iter()
                .filter(|(m, _)| m.exponent(s) == k)
                .map(|(m, c)| (m.without(s), c.clone())),
        )
    }

    /// Smallest exponent of `s` over all terms (0 for the zero polynomial).
    pub fn min_power(&self, s: Symbol) -> u32 {
        self.terms.keys().map(|m| m.exponent(s)).min().unwrap_or(0)
    }

    /// Coefficients of the degree-one monomials.
    pub fn linear_part(&self) -> BTreeMap<Symbol, C> {
        self.terms
            .iter()
            .filter(|(m, _)| m.degree() == 1)
            .map(|(m, c)| (m.pairs()[0].0, c.clone()))
            .collect()
    }

    /// Sum of the terms of total degree `d`.
    pub fn homogeneous_part(&self, d: u32) -> Self {
        Poly::from_terms(self.terms.iter().filter(|(m, _)| m.degree() == d).map(|(m, c)| (m.clone(), c.clone())))
    }

    /// Replaces symbols by polynomials; symbols without an entry are kept.
    pub fn substitute(&self, map: &HashMap<Symbol, Poly<C>>) -> Self {
        let mut out = Poly::zero();
        let mut pow_cache: HashMap<(Symbol, u32), Poly<C>> = HashMap::new();
        for (m, c) in &self.terms {
            let mut acc = Poly::constant(c.clone());
            let mut kept = Vec::new();
            for &(s, e) in m.pairs() {
                match map.get(&s) {
                    Some(p) => {
                        let pw = pow_cache.entry((s, e)).or_insert_with(|| p.pow(e)).clone();
                        acc = acc.mul(&pw);
                    }
                    None => kept.push((s, e)),
                }
            }
            let acc = acc.mul_monomial(&Monomial::from_pairs(kept));
            out = out.add(&acc);
        }
        out
    }

    /// Partial derivative with respect to `s`.
    pub fn derivative(&self, s: Symbol) -> Self {
        Poly::from_terms(self.terms.iter().filter_map(|(m, c)| {
            let e = m.exponent(s);
            (e > 0).then(|| {
                let pairs = m.pairs().iter().map(|&(t, k)| (t, if t == s { k - 1 } else { k })).collect();
                (Monomial::from_pairs(pairs), c.mul(&C::from_int(e as i64)))
            })
        }))
    }

    pub fn map_coeffs<D: Coeff>(&self, f: impl Fn(&C) -> D) -> Poly<D> {
        Poly::from_terms(self.terms.iter().map(|(m, c)| (m.clone(), f(c))))
    }

    pub fn eval_f64(&self, coeff: impl Fn(&C) -> f64, val: impl Fn(Symbol) -> f64) -> f64 {
        self.terms
            .iter()
            .map(|(m, c)| {
                m.pairs().iter().fold(coeff(c), |acc, &(s, e)| acc * val(s).powi(e as i32))
            })
            .sum()
    }

    /// Exact evaluation with rational coefficient and symbol values.
    pub fn eval_exact(&self, coeff: impl Fn(&C) -> BigRational, val: impl Fn(Symbol) -> BigRational) -> BigRational {
        self.terms
            .iter()
            .map(|(m, c)| m.pairs().iter().fold(coeff(c), |acc, &(s, e)| acc * num_traits::pow(val(s), e as usize)))
            .sum()
    }
}

impl<C: Coeff> Coeff for Poly<C> {
    fn zero() -> Self {
        Poly::zero()
    }
    fn one() -> Self {
        Poly::constant(C::one())
    }
    fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }
    fn add(&self, rhs: &Self) -> Self {
        let mut out = self.clone();
        for (m, c) in &rhs.terms {
            out.add_term(m.clone(), c);
        }
        out
    }
    fn sub(&self, rhs: &Self) -> Self {
        let mut out = self.clone();
        for (m, c) in &rhs.terms {
            out.add_term(m.clone(), &c.neg());
        }
        out
    }
    fn mul(&self, rhs: &Self) -> Self {
        let mut out = Poly::zero();
        for (ma, ca) in &self.terms {
            for (mb, cb) in &rhs.terms {
                out.add_term(ma.mul(mb), &ca.mul(cb));
            }
        }
        out
    }
    fn neg(&self) -> Self {
        Poly { terms: self.terms.iter().map(|(m, c)| (m.clone(), c.neg())).collect() }
    }
    fn from_rational(q: &BigRational) -> Self {
        Poly::constant(C::from_rational(q))
    }
    fn add_assign(&mut self, rhs: &Self) {
        for (m, c) in &rhs.terms {
            self.add_term(m.clone(), c);
        }
    }
}

impl<C: Coeff + fmt::Display> fmt::Display for Poly<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, (m, c)) in self.terms.iter().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            if m.is_one() {
                write!(f, "[{c}]")?;
            } else {
                write!(f, "[{c}]*{m}")?;
            }
        }
        Ok(())
    }
}

impl<C: Coeff> fmt::Debug for Poly<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_map().entries(self.terms.iter().map(|(m, c)| (m.to_string(), c))).finish()
    }
}

impl ParamPoly {
    /// Multiplies by `π^k`.
    pub fn mul_pi_pow(&self, k: usize) -> Self {
        let pk = PiPoly::monomial(super::coeff::int(1), k);
        self.scale(&pk)
    }

    pub fn from_rational_poly(p: &Poly<BigRational>) -> Self {
        p.map_coeffs(|c| PiPoly::constant(c.clone()))
    }
}
