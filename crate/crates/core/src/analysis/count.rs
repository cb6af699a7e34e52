//! Second-order counts and the summary table.

use serde::{Deserialize, Serialize};

use super::blowup::{h_system, BlowupSpec, CertifiedBlowup};
use super::hsolve::{solve_h_system, SolveOptions};
use super::ladder::{first_order_count, paper_pivots, CycleCountReport, Ladder, PivotPolicy};
use crate::error::{Error, Result};
use crate::expansion::DifferenceJet;
use crate::systems::{CaseName, LoudSystem};

/// Second-order count with the blow-up that certifies it, if any was needed.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SecondOrderCount {
    pub report: CycleCountReport,
    pub blowup: Option<CertifiedBlowup>,
}

/// Pivot policy used for the second-order analysis of a case.
pub fn second_order_policy(name: CaseName) -> PivotPolicy {
    if paper_pivots(name).is_some() {
        PivotPolicy::Paper
    } else {
        PivotPolicy::Canonical
    }
}

/// Lower bound from the built-in blow-up of the case, or the first-order
/// bound for cases without one.
///
/// With a blow-up, rows `1..extra` can be given alternating signs and
/// decreasing sizes, which yields `extra − 1` simple zeros plus the
/// pseudo-Hopf cycle.
pub fn second_order_count(jet: &DifferenceJet, opt: &SolveOptions) -> Result<SecondOrderCount> {
    if jet.order < 2 {
        return Err(Error::Invalid("second-order count needs an order-2 jet".into()));
    }
    let ladder = Ladder::build(jet, second_order_policy(jet.name))?;
    let first = first_order_count(&ladder)?;
    let spec = match BlowupSpec::for_case(jet.name) {
        Ok(s) => s,
        Err(_) => return Ok(SecondOrderCount { report: CycleCountReport { order: 2, ..first }, blowup: None }),
    };
    let h = h_system(jet, &ladder, &spec)?;
    let solution = solve_h_system(&h, opt).map_err(|e| {
        Error::Certificate(format!("{}: h-system of the blow-up has no certified solution ({e})", jet.name))
    })?;
    if !solution.certified() {
        return Err(Error::Certificate(format!(
            "{}: residual {:.3e}, scaled determinant {:.3e}, h_{{{},0}} = {:.3e}",
            jet.name, solution.residual, solution.scaled_det, solution.extra_row, solution.extra_value
        )));
    }
    let rows = spec.extra.0;
    let simple_zeros = rows - 1;
    let report = if simple_zeros + 1 > first.total {
        CycleCountReport { order: 2, simple_zeros, pseudo_hopf: 1, total: simple_zeros + 1, ..first }
    } else {
        CycleCountReport { order: 2, ..first }
    };
    Ok(SecondOrderCount { report, blowup: Some(CertifiedBlowup { spec, solution }) })
}

/// Expected `(first, second)` order totals at `τ = 1/2`.
pub const EXPECTED_TABLE: [(CaseName, usize, usize); 5] = [
    (CaseName::smooth(LoudSystem::S1), 7, 7),
    (CaseName::smooth(LoudSystem::S2), 8, 10),
    (CaseName::smooth(LoudSystem::S3), 9, 9),
    (CaseName::smooth(LoudSystem::S4), 9, 12),
    (CaseName::S1S2, 10, 12),
];

/// One cell of the summary table: a certified total or the reason it is missing.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "lowercase")]
pub enum Cell {
    Value { total: usize },
    Missing { reason: String },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TableRow {
    pub system: String,
    pub first: Cell,
    pub second: Cell,
    pub expected_first: usize,
    pub expected_second: usize,
}

impl TableRow {
    pub fn matches(&self) -> bool {
        self.first == Cell::Value { total: self.expected_first }
            && self.second == Cell::Value { total: self.expected_second }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SummaryTable {
    pub rows: Vec<TableRow>,
}

impl SummaryTable {
    pub fn from_cells(cells: Vec<(CaseName, Cell, Cell)>) -> SummaryTable {
        let rows = EXPECTED_TABLE
            .iter()
            .map(|&(name, e1, e2)| {
                let found = cells.iter().find(|(n, _, _)| *n == name);
                let missing = || Cell::Missing { reason: "not computed".into() };
                TableRow {
                    system: name.to_string(),
                    first: found.map_or_else(missing, |c| c.1.clone()),
                    second: found.map_or_else(missing, |c| c.2.clone()),
                    expected_first: e1,
                    expected_second: e2,
                }
            })
            .collect();
        SummaryTable { rows }
    }

    pub fn matches(&self) -> bool {
        self.rows.iter().all(TableRow::matches)
    }

    /// Rows that differ from the expected values.
    pub fn mismatches(&self) -> Vec<&TableRow> {
        self.rows.iter().filter(|r| !r.matches()).collect()
    }

    pub fn render(&self) -> String {
        let cell = |c: &Cell| match c {
            Cell::Value { total } => total.to_string(),
            Cell::Missing { .. } => "missing".to_string(),
        };
        let mut out = format!("{:<8} {:>10} {:>10}  {}\n", "system", "1st order", "2nd order", "expected");
        for r in &self.rows {
            let flag = if r.matches() { "" } else { "  MISMATCH" };
            out.push_str(&format!(
                "{:<8} {:>10} {:>10}  {}/{}{flag}\n",
                r.system,
                cell(&r.first),
                cell(&r.second),
                r.expected_first,
                r.expected_second
            ));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn full() -> Vec<(CaseName, Cell, Cell)> {
        EXPECTED_TABLE
            .iter()
            .map(|&(n, a, b)| (n, Cell::Value { total: a }, Cell::Value { total: b }))
            .collect()
    }

    #[test]
    fn table_diff() {
        let t = SummaryTable::from_cells(full());
        assert!(t.matches());
        assert!(!t.render().contains("MISMATCH"));

        let mut cells = full();
        cells[3].2 = Cell::Value { total: 11 };
        let t = SummaryTable::from_cells(cells);
        assert!(!t.matches());
        assert_eq!(t.mismatches()[0].system, "S4");

        let mut cells = full();
        cells.pop();
        let t = SummaryTable::from_cells(cells);
        assert!(!t.matches());
        assert!(t.render().contains("missing"));
    }
}
