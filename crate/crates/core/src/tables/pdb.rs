use std::fmt::Write;
use std::path::Path;

use super::{read_text, write_text, TableError};
use crate::protein::Vec3;

/// One `ATOM` record.
#[derive(Debug, Clone, PartialEq)]
pub struct AtomRecord {
    pub serial: u32,
    pub name: String,
    pub res_name: String,
    pub chain: char,
    pub res_seq: i32,
    pub pos: Vec3,
    pub occupancy: f64,
    pub b_factor: f64,
    pub element: String,
}

impl AtomRecord {
    pub fn is_hydrogen(&self) -> bool {
        self.element == "H" || self.element == "D"
    }
}

/// Atoms of a structure in file order.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ProteinStructure {
    pub atoms: Vec<AtomRecord>,
}

impl ProteinStructure {
    pub fn find(&self, chain: char, res_seq: i32, name: &str) -> Option<&AtomRecord> {
        self.atoms.iter().find(|a| a.chain == chain && a.res_seq == res_seq && a.name == name)
    }

    pub fn residue_name(&self, chain: char, res_seq: i32) -> Option<&str> {
        self.atoms.iter().find(|a| a.chain == chain && a.res_seq == res_seq).map(|a| a.res_name.as_str())
    }

    /// Copy with every atom whose element is in `elements` removed.
    pub fn without_elements(&self, elements: &[&str]) -> Self {
        Self { atoms: self.atoms.iter().filter(|a| !elements.contains(&a.element.as_str())).cloned().collect() }
    }
}

fn column(line: &str, from: usize, to: usize) -> &str {
    let end = to.min(line.len());
    if from > end {
        ""
    } else {
        &line[from - 1..end]
    }
}

fn infer_element(name: &str) -> String {
    name.chars().find(|c| c.is_ascii_alphabetic()).map(|c| c.to_string()).unwrap_or_default()
}

pub fn parse_pdb(path: &Path) -> Result<ProteinStructure, TableError> {
    parse_pdb_str(&read_text(path)?)
}

/// Reads fixed-column `ATOM` records; every other record type is ignored.
pub fn parse_pdb_str(text: &str) -> Result<ProteinStructure, TableError> {
    let mut atoms: Vec<AtomRecord> = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let n = i + 1;
        if !line.starts_with("ATOM  ") && line != "ATOM" {
            continue;
        }
        if !line.is_ascii() {
            return Err(TableError::parse(n, "non-ASCII ATOM record"));
        }
        if line.len() < 54 {
            return Err(TableError::parse(n, format!("ATOM record has {} columns, need at least 54", line.len())));
        }
        let num = |from, to, what: &str| -> Result<f64, TableError> {
            let s = column(line, from, to).trim();
            let v: f64 = s.parse().map_err(|_| TableError::parse(n, format!("bad {what} `{s}`")))?;
            if v.is_finite() {
                Ok(v)
            } else {
                Err(TableError::parse(n, format!("non-finite {what}")))
            }
        };
        let optional = |from, to, what: &str, default: f64| {
            if column(line, from, to).trim().is_empty() {
                Ok(default)
            } else {
                num(from, to, what)
            }
        };
        let serial_text = column(line, 7, 11).trim();
        let serial = if serial_text.is_empty() {
            0
        } else {
            serial_text.parse().map_err(|_| TableError::parse(n, format!("bad serial `{serial_text}`")))?
        };
        let name = column(line, 13, 16).trim().to_string();
        if name.is_empty() {
            return Err(TableError::parse(n, "empty atom name"));
        }
        let res_text = column(line, 23, 26).trim();
        let res_seq: i32 =
            res_text.parse().map_err(|_| TableError::parse(n, format!("bad residue number `{res_text}`")))?;
        let chain = column(line, 22, 22).chars().next().unwrap_or(' ');
        let pos = Vec3::new(num(31, 38, "x")?, num(39, 46, "y")?, num(47, 54, "z")?);
        let element = match column(line, 77, 78).trim() {
            "" => infer_element(&name),
            e => e.to_ascii_uppercase(),
        };
        if let Some(prev) = atoms.iter().rev().find(|a| a.chain == chain) {
            if res_seq < prev.res_seq {
                return Err(TableError::parse(
                    n,
                    format!("residue {res_seq} follows {} in chain {chain}", prev.res_seq),
                ));
            }
        }
        atoms.push(AtomRecord {
            serial,
            name,
            res_name: column(line, 18, 20).trim().to_string(),
            chain,
            res_seq,
            pos,
            occupancy: optional(55, 60, "occupancy", 1.0)?,
            b_factor: optional(61, 66, "temperature factor", 0.0)?,
            element,
        });
    }
    if atoms.is_empty() {
        return Err(TableError::EmptyStructure);
    }
    Ok(ProteinStructure { atoms })
}

/// Atom name field: names shorter than four characters with a one-letter
/// element start in column 14.
fn name_field(name: &str, element: &str) -> String {
    if name.len() < 4 && element.len() <= 1 {
        format!(" {name:<3}")
    } else {
        format!("{name:<4}")
    }
}

pub(crate) fn format_pdb(structure: &ProteinStructure) -> String {
    let mut out = String::new();
    for a in &structure.atoms {
        writeln!(
            out,
            "ATOM  {:>5} {} {:>3} {}{:>4}    {:>8.3}{:>8.3}{:>8.3}{:>6.2}{:>6.2}          {:>2}",
            a.serial,
            name_field(&a.name, &a.element),
            a.res_name,
            a.chain,
            a.res_seq,
            a.pos.x,
            a.pos.y,
            a.pos.z,
            a.occupancy,
            a.b_factor,
            a.element
        )
        .unwrap();
    }
    out.push_str("END\n");
    out
}

pub fn write_pdb(structure: &ProteinStructure, path: &Path) -> Result<(), TableError> {
    write_text(path, &format_pdb(structure))
}
