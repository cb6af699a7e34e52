//! Exact difference-function expansions for piecewise quadratic perturbations
//! of planar isochronous centers, the counting analysis built on them, and a
//! numeric oracle for cross-validation.

pub mod analysis;
pub mod centercheck;
pub mod cli;
pub mod error;
pub mod expansion;
pub mod modp;
pub mod numeric;
pub mod systems;
pub mod trigcalc;

pub use error::{Error, Result};
