use std::collections::HashMap;
use std::fmt::Write;
use std::path::Path;

use super::format::{fmt_f64, parse_f64, parse_usize, TableText};
use super::{read_text, write_text, TableError};

/// Distance-binned pair scores over an atom-type vocabulary.
///
/// Header fields: `types` (space separated), `bin_width`, `max_distance`,
/// optional `sentinel` (default 8) and optional `fallback` type. Body lines
/// are `typeA typeB bin score`; each entry also fills the mirrored cell.
#[derive(Debug, Clone, PartialEq)]
pub struct PotentialTable {
    types: Vec<String>,
    bin_width: f64,
    max_distance: f64,
    sentinel: f64,
    fallback: Option<usize>,
    n_bins: usize,
    scores: Vec<f64>,
}

impl PotentialTable {
    /// All-zero table.
    pub fn new(types: Vec<String>, bin_width: f64, max_distance: f64, sentinel: f64) -> Result<Self, TableError> {
        if types.is_empty() {
            return Err(TableError::Dimension("empty type vocabulary".into()));
        }
        if !(bin_width > 0.0 && max_distance > 0.0 && bin_width.is_finite() && max_distance.is_finite()) {
            return Err(TableError::Dimension(format!("bad binning: width {bin_width}, max {max_distance}")));
        }
        let mut seen = HashMap::new();
        for (i, t) in types.iter().enumerate() {
            if seen.insert(t.as_str(), i).is_some() {
                return Err(TableError::Dimension(format!("type `{t}` listed twice")));
            }
        }
        let n_bins = (max_distance / bin_width).ceil() as usize;
        let k = types.len();
        Ok(Self { types, bin_width, max_distance, sentinel, fallback: None, n_bins, scores: vec![0.0; k * k * n_bins] })
    }

    pub fn types(&self) -> &[String] {
        &self.types
    }

    pub fn bin_width(&self) -> f64 {
        self.bin_width
    }

    pub fn max_distance(&self) -> f64 {
        self.max_distance
    }

    pub fn sentinel(&self) -> f64 {
        self.sentinel
    }

    pub fn n_bins(&self) -> usize {
        self.n_bins
    }

    pub fn fallback(&self) -> Option<&str> {
        self.fallback.map(|i| self.types[i].as_str())
    }

    pub fn set_fallback(&mut self, name: Option<&str>) -> Result<(), TableError> {
        self.fallback = match name {
            None => None,
            Some(n) => Some(
                self.type_index(n)
                    .ok_or_else(|| TableError::Dimension(format!("fallback type `{n}` not in vocabulary")))?,
            ),
        };
        Ok(())
    }

    pub fn type_index(&self, name: &str) -> Option<usize> {
        self.types.iter().position(|t| t == name)
    }

    fn cell(&self, a: usize, b: usize, bin: usize) -> usize {
        (a * self.types.len() + b) * self.n_bins + bin
    }

    /// Sets both `(a, b, bin)` and `(b, a, bin)`.
    pub fn set(&mut self, a: usize, b: usize, bin: usize, score: f64) {
        let (i, j) = (self.cell(a, b, bin), self.cell(b, a, bin));
        self.scores[i] = score;
        self.scores[j] = score;
    }

    pub fn get(&self, a: usize, b: usize, bin: usize) -> f64 {
        self.scores[self.cell(a, b, bin)]
    }

    /// Bin of a distance, or `None` at or beyond `max_distance`.
    pub fn bin_of(&self, d: f64) -> Option<usize> {
        if d >= self.max_distance {
            return None;
        }
        Some(((d / self.bin_width) as usize).min(self.n_bins - 1))
    }

    /// Score of a pair at distance `d`; zero beyond the table range.
    pub fn score(&self, a: usize, b: usize, d: f64) -> f64 {
        match self.bin_of(d) {
            Some(bin) => self.get(a, b, bin),
            None => 0.0,
        }
    }

    pub fn is_clash(&self, score: f64) -> bool {
        score == self.sentinel
    }

    pub fn typer(&self) -> AtomTyper<'_> {
        AtomTyper { table: self }
    }
}

/// Resolves structure atoms to potential types: `RES:NAME`, then `NAME`,
/// then the element symbol, then the table's fallback type.
#[derive(Debug, Clone, Copy)]
pub struct AtomTyper<'a> {
    table: &'a PotentialTable,
}

impl AtomTyper<'_> {
    pub fn resolve(&self, res_name: &str, atom_name: &str, element: &str) -> Option<usize> {
        let t = self.table;
        t.type_index(&format!("{res_name}:{atom_name}"))
            .or_else(|| t.type_index(atom_name))
            .or_else(|| (!element.is_empty()).then(|| t.type_index(element)).flatten())
            .or(t.fallback)
    }
}

pub fn load_potential_table(path: &Path) -> Result<PotentialTable, TableError> {
    parse_potential(&read_text(path)?)
}

pub(crate) fn parse_potential(text: &str) -> Result<PotentialTable, TableError> {
    let doc = TableText::parse(text, "potential")?;
    let (_, types) = doc.require("types")?;
    let types: Vec<String> = types.split_whitespace().map(str::to_string).collect();
    let (n, w) = doc.require("bin_width")?;
    let bin_width = parse_f64(n, w)?;
    let (n, m) = doc.require("max_distance")?;
    let max_distance = parse_f64(n, m)?;
    let sentinel = doc.number("sentinel")?.unwrap_or(8.0);
    let mut table = PotentialTable::new(types, bin_width, max_distance, sentinel)?;
    if let Some((_, f)) = doc.get("fallback") {
        table.set_fallback(Some(f))?;
    }

    let mut declared = vec![false; table.scores.len()];
    for &(n, line) in &doc.body {
        let cols: Vec<&str> = line.split_whitespace().collect();
        if cols.len() != 4 {
            return Err(TableError::parse(n, format!("expected `typeA typeB bin score`, found `{line}`")));
        }
        let lookup = |name: &str| {
            table.type_index(name).ok_or_else(|| TableError::parse(n, format!("unknown atom type `{name}`")))
        };
        let (a, b) = (lookup(cols[0])?, lookup(cols[1])?);
        let bin = parse_usize(n, cols[2])?;
        if bin >= table.n_bins {
            return Err(TableError::parse(n, format!("bin {bin} out of range (table has {})", table.n_bins)));
        }
        let score = parse_f64(n, cols[3])?;
        let cells = [table.cell(a, b, bin), table.cell(b, a, bin)];
        for &cell in &cells[..if a == b { 1 } else { 2 }] {
            if declared[cell] && table.scores[cell].to_bits() != score.to_bits() {
                return Err(TableError::Asymmetry {
                    a: cols[0].into(),
                    b: cols[1].into(),
                    bin,
                    first: table.scores[cell],
                    second: score,
                });
            }
            declared[cell] = true;
        }
        table.set(a, b, bin, score);
    }
    Ok(table)
}

pub(crate) fn format_potential(table: &PotentialTable) -> String {
    let mut out = String::from("#! updown potential v1\n");
    writeln!(out, "types: {}", table.types.join(" ")).unwrap();
    writeln!(out, "bin_width: {}", fmt_f64(table.bin_width)).unwrap();
    writeln!(out, "max_distance: {}", fmt_f64(table.max_distance)).unwrap();
    writeln!(out, "sentinel: {}", fmt_f64(table.sentinel)).unwrap();
    if let Some(f) = table.fallback() {
        writeln!(out, "fallback: {f}").unwrap();
    }
    out.push_str("data:\n");
    let k = table.types.len();
    for a in 0..k {
        for b in a..k {
            for bin in 0..table.n_bins {
                let v = table.get(a, b, bin);
                if v.to_bits() != 0 {
                    writeln!(out, "{} {} {} {}", table.types[a], table.types[b], bin, fmt_f64(v)).unwrap();
                }
            }
        }
    }
    out
}

pub fn write_potential_table(table: &PotentialTable, path: &Path) -> Result<(), TableError> {
    write_text(path, &format_potential(table))
}
