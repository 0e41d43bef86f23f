//! Energy tables and structures on disk.
//!
//! Every table file is UTF-8 text. The first line is `#! updown <kind> v1`,
//! followed by `key: value` header lines, a line `data:`, and the body.
//! Blank lines and lines starting with `#` are ignored.

mod closure;
mod dihedral;
mod format;
mod pdb;
mod potential;
mod synthetic;

use std::path::{Path, PathBuf};

use thiserror::Error;

pub use closure::{load_closure_ranges, write_closure_ranges, ClosureRange, ClosureRangeTable};
pub use dihedral::{
    angle_bin, load_dihedral_tables, write_dihedral_tables, DihedralDistribution, DihedralDistributionSet, BINS,
    BIN_DEGREES,
};
pub use pdb::{parse_pdb, parse_pdb_str, write_pdb, AtomRecord, ProteinStructure};
pub use potential::{load_potential_table, write_potential_table, AtomTyper, PotentialTable};
pub use synthetic::{
    generate_synthetic_tables, synthetic_mini_protein, SyntheticFiles, SyntheticSpec, MINI_LOOP_LENGTH, MINI_LOOP_START,
};

#[derive(Debug, Error)]
pub enum TableError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("conflicting mirrored entries for {a}-{b} bin {bin}: {first} vs {second}")]
    Asymmetry { a: String, b: String, bin: usize, first: f64, second: f64 },
    #[error("{0}")]
    Dimension(String),
    #[error("{residue}: matrix sums to {sum}")]
    Normalization { residue: String, sum: f64 },
    #[error("closure row {steps}: min {min} > max {max}")]
    NonMonotoneRange { steps: usize, min: f64, max: f64 },
    #[error("structure has no ATOM records")]
    EmptyStructure,
}

impl TableError {
    pub(crate) fn parse(line: usize, message: impl Into<String>) -> Self {
        TableError::Parse { line, message: message.into() }
    }
}

pub(crate) fn read_text(path: &Path) -> Result<String, TableError> {
    std::fs::read_to_string(path).map_err(|source| TableError::Io { path: path.to_path_buf(), source })
}

pub(crate) fn write_text(path: &Path, text: &str) -> Result<(), TableError> {
    std::fs::write(path, text).map_err(|source| TableError::Io { path: path.to_path_buf(), source })
}

/// Pairwise potential, dihedral distributions and closure ranges.
#[derive(Debug, Clone, PartialEq)]
pub struct EnergyTables {
    pub potential: PotentialTable,
    pub dihedrals: DihedralDistributionSet,
    pub closure: ClosureRangeTable,
}

impl EnergyTables {
    pub fn load(potential: &Path, dihedrals: &Path, closure: &Path) -> Result<Self, TableError> {
        Ok(Self {
            potential: load_potential_table(potential)?,
            dihedrals: load_dihedral_tables(dihedrals)?,
            closure: load_closure_ranges(closure)?,
        })
    }
}
