//! Exact kernel: rationals, π-polynomials, parameter polynomials and
//! polynomials in θ and its harmonics.

pub mod coeff;
pub mod fourier;
pub mod pipoly;
pub mod poly;
pub mod serial;
pub mod symbol;

pub use coeff::{format_rational, int, parse_rational, rat, Coeff};
pub use fourier::{Basis, ThetaFourierPoly, Trig};
pub use pipoly::PiPoly;
pub use poly::{Monomial, ParamPoly, Poly};
pub use serial::JsonCoeff;
pub use symbol::{Component, Pert, Side, Symbol};
