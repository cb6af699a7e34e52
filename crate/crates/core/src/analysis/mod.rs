//! Counting machinery: independence ladder, elimination of dependent rows,
//! parameter blow-ups and the truncated h-systems.

pub mod blowup;
pub mod count;
pub mod hsolve;
pub mod ladder;
pub mod pifrac;

pub use count::{second_order_count, SecondOrderCount, SummaryTable};
pub use ladder::{first_order_count, CycleCountReport, Ladder, PivotPolicy};
pub use pifrac::PiFrac;
