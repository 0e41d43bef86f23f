use std::fmt::Write;
use std::path::Path;

use super::format::{fmt_f64, parse_f64, parse_usize, TableText};
use super::{read_text, write_text, TableError};

/// Allowed distances (Å) from `C_t` and from `Cα_{t+1}` to the closure
/// target when `k = T - t` steps remain after step `t`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClosureRange {
    pub min_c: f64,
    pub max_c: f64,
    pub min_ca: f64,
    pub max_ca: f64,
}

impl ClosureRange {
    /// Inclusive interval membership for both distances.
    pub fn admits(&self, c_distance: f64, ca_distance: f64) -> bool {
        (self.min_c..=self.max_c).contains(&c_distance) && (self.min_ca..=self.max_ca).contains(&ca_distance)
    }
}

/// Rows indexed by the number of remaining steps, contiguous from 0.
#[derive(Debug, Clone, PartialEq)]
pub struct ClosureRangeTable {
    rows: Vec<ClosureRange>,
}

impl ClosureRangeTable {
    pub fn new(rows: Vec<ClosureRange>) -> Result<Self, TableError> {
        for (k, r) in rows.iter().enumerate() {
            for (min, max) in [(r.min_c, r.max_c), (r.min_ca, r.max_ca)] {
                if !(min.is_finite() && max.is_finite()) {
                    return Err(TableError::Dimension(format!("closure row {k}: non-finite bound")));
                }
                if min > max {
                    return Err(TableError::NonMonotoneRange { steps: k, min, max });
                }
            }
        }
        Ok(Self { rows })
    }

    pub fn get(&self, steps_remaining: usize) -> Option<&ClosureRange> {
        self.rows.get(steps_remaining)
    }

    pub fn rows(&self) -> &[ClosureRange] {
        &self.rows
    }

    /// Largest covered `steps_remaining`, if any.
    pub fn max_steps(&self) -> Option<usize> {
        self.rows.len().checked_sub(1)
    }
}

/// Body rows: `k min_c max_c min_ca max_ca`.
pub fn load_closure_ranges(path: &Path) -> Result<ClosureRangeTable, TableError> {
    parse_closure(&read_text(path)?)
}

pub(crate) fn parse_closure(text: &str) -> Result<ClosureRangeTable, TableError> {
    let doc = TableText::parse(text, "closure")?;
    let mut rows = Vec::with_capacity(doc.body.len());
    for &(n, line) in &doc.body {
        let cols: Vec<&str> = line.split_whitespace().collect();
        if cols.len() != 5 {
            return Err(TableError::parse(n, format!("expected `k min_c max_c min_ca max_ca`, found `{line}`")));
        }
        let k = parse_usize(n, cols[0])?;
        if k != rows.len() {
            return Err(TableError::parse(n, format!("expected row {}, found {k}", rows.len())));
        }
        let v: Vec<f64> = cols[1..].iter().map(|c| parse_f64(n, c)).collect::<Result<_, _>>()?;
        rows.push(ClosureRange { min_c: v[0], max_c: v[1], min_ca: v[2], max_ca: v[3] });
    }
    ClosureRangeTable::new(rows)
}

pub(crate) fn format_closure(table: &ClosureRangeTable) -> String {
    let mut out = String::from("#! updown closure v1\n# k min_c max_c min_ca max_ca\ndata:\n");
    for (k, r) in table.rows.iter().enumerate() {
        writeln!(out, "{k} {} {} {} {}", fmt_f64(r.min_c), fmt_f64(r.max_c), fmt_f64(r.min_ca), fmt_f64(r.max_ca))
            .unwrap();
    }
    out
}

pub fn write_closure_ranges(table: &ClosureRangeTable, path: &Path) -> Result<(), TableError> {
    write_text(path, &format_closure(table))
}
