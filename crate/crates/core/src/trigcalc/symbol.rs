use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Half-plane of the switching line.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Minus,
    Plus,
}

impl Side {
    pub fn sign_char(self) -> char {
        match self {
            Side::Plus => '+',
            Side::Minus => '-',
        }
    }

    pub fn other(self) -> Side {
        match self {
            Side::Plus => Side::Minus,
            Side::Minus => Side::Plus,
        }
    }
}

impl FromStr for Side {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "plus" | "+" => Ok(Side::Plus),
            "minus" | "-" => Ok(Side::Minus),
            _ => Err(Error::Parse(format!("side must be plus or minus, got {s:?}"))),
        }
    }
}

/// Which component of the perturbation a coefficient belongs to: `a` for the
/// first component, `b` for the second.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Component {
    A,
    B,
}

/// Exponent pairs of the quadratic perturbation in graded order.
pub const ETAS: [(u8, u8); 5] = [(1, 0), (0, 1), (2, 0), (1, 1), (0, 2)];

/// Perturbation coefficient `a^±_η` or `b^±_η`.
///
/// The derived order is the canonical pivot order: minus side first, then
/// `a` before `b`, then `η` in [`ETAS`] order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Pert {
    pub side: Side,
    pub comp: Component,
    eta_index: u8,
}

impl Pert {
    pub fn new(side: Side, comp: Component, eta: (u8, u8)) -> Self {
        let eta_index = ETAS
            .iter()
            .position(|&e| e == eta)
            .unwrap_or_else(|| panic!("exponent {eta:?} outside 0 < |η| ≤ 2")) as u8;
        Pert { side, comp, eta_index }
    }

    pub fn eta(&self) -> (u8, u8) {
        ETAS[self.eta_index as usize]
    }

    /// Position of this symbol among the ten coefficients of its side.
    pub fn local_index(&self) -> usize {
        let c = match self.comp {
            Component::A => 0,
            Component::B => 5,
        };
        c + self.eta_index as usize
    }

    pub fn from_local_index(side: Side, i: usize) -> Self {
        let comp = if i < 5 { Component::A } else { Component::B };
        Pert { side, comp, eta_index: (i % 5) as u8 }
    }

    /// All ten symbols of one side in local-index order.
    pub fn side_symbols(side: Side) -> Vec<Pert> {
        (0..10).map(|i| Pert::from_local_index(side, i)).collect()
    }

    /// All twenty symbols in canonical order.
    pub fn all() -> Vec<Pert> {
        let mut v = Self::side_symbols(Side::Minus);
        v.extend(Self::side_symbols(Side::Plus));
        v.sort();
        v
    }
}

/// Every indeterminate that can appear in a [`super::poly::Poly`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Symbol {
    Pert(Pert),
    Alpha(u16),
    Gamma(u16),
    Z(u16),
    Beta(u16),
    Tau,
    CosAlpha,
    SinAlpha,
}

impl Symbol {
    pub fn pert(side: Side, comp: Component, eta: (u8, u8)) -> Self {
        Symbol::Pert(Pert::new(side, comp, eta))
    }

    pub fn is_perturbation(&self) -> bool {
        matches!(self, Symbol::Pert(_))
    }
}

impl fmt::Display for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Symbol::Pert(p) => {
                let c = match p.comp {
                    Component::A => 'a',
                    Component::B => 'b',
                };
                let (e1, e2) = p.eta();
                write!(f, "{c}{}{e1}{e2}", p.side.sign_char())
            }
            Symbol::Alpha(i) => write!(f, "alpha{i}"),
            Symbol::Gamma(i) => write!(f, "gamma{i}"),
            Symbol::Z(i) => write!(f, "z{i}"),
            Symbol::Beta(i) => write!(f, "beta{i}"),
            Symbol::Tau => write!(f, "tau"),
            Symbol::CosAlpha => write!(f, "cos_alpha"),
            Symbol::SinAlpha => write!(f, "sin_alpha"),
        }
    }
}

impl FromStr for Symbol {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Parse(format!("unknown symbol {s:?}"));
        let indexed = |prefix: &str| -> Option<u16> { s.strip_prefix(prefix).and_then(|r| r.parse().ok()) };
        match s {
            "tau" => return Ok(Symbol::Tau),
            "cos_alpha" => return Ok(Symbol::CosAlpha),
            "sin_alpha" => return Ok(Symbol::SinAlpha),
            _ => {}
        }
        if let Some(i) = indexed("alpha") {
            return Ok(Symbol::Alpha(i));
        }
        if let Some(i) = indexed("gamma") {
            return Ok(Symbol::Gamma(i));
        }
        if let Some(i) = indexed("beta") {
            return Ok(Symbol::Beta(i));
        }
        if let Some(i) = indexed("z") {
            return Ok(Symbol::Z(i));
        }
        let b = s.as_bytes();
        if b.len() == 4 {
            let comp = match b[0] {
                b'a' => Component::A,
                b'b' => Component::B,
                _ => return Err(bad()),
            };
            let side = match b[1] {
                b'+' => Side::Plus,
                b'-' => Side::Minus,
                _ => return Err(bad()),
            };
            let e1 = (b[2] as char).to_digit(10).ok_or_else(bad)? as u8;
            let e2 = (b[3] as char).to_digit(10).ok_or_else(bad)? as u8;
            if !ETAS.contains(&(e1, e2)) {
                return Err(bad());
            }
            return Ok(Symbol::pert(side, comp, (e1, e2)));
        }
        Err(bad())
    }
}

impl Serialize for Symbol {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Symbol {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_round_trip() {
        for p in Pert::all() {
            let s = Symbol::Pert(p);
            assert_eq!(s.to_string().parse::<Symbol>().unwrap(), s);
        }
        for s in [Symbol::Alpha(12), Symbol::Gamma(7), Symbol::Z(3), Symbol::Tau, Symbol::SinAlpha] {
            assert_eq!(s.to_string().parse::<Symbol>().unwrap(), s);
        }
        assert_eq!(Symbol::pert(Side::Plus, Component::A, (1, 0)).to_string(), "a+10");
        assert!("c+10".parse::<Symbol>().is_err());
        assert!("a+00".parse::<Symbol>().is_err());
    }

    #[test]
    fn canonical_order() {
        let all = Pert::all();
        assert_eq!(all.len(), 20);
        assert_eq!(Symbol::Pert(all[0]).to_string(), "a-10");
        assert_eq!(Symbol::Pert(all[1]).to_string(), "a-01");
        assert_eq!(Symbol::Pert(all[5]).to_string(), "b-10");
        assert_eq!(Symbol::Pert(all[10]).to_string(), "a+10");
    }
}
