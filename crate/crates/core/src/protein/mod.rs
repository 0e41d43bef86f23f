//! Backbone segment sampling.
//!
//! A segment of `T + 1` residues starting at residue `s` is rebuilt from its
//! dihedrals with the rest of the protein held fixed. State `x_t` holds the
//! dihedrals of residue `s + t`, and step `t` places `C`, `O` of residue
//! `s + t` and `N`, `Cα` of residue `s + t + 1`. Proposals come from the
//! dihedral tables, so the incremental weight is `exp(-H_a / 10)` times the
//! closure indicator.

mod dihedral;
mod energy;
pub mod geometry;
mod grid;
mod segment;

use thiserror::Error;

pub use dihedral::{eval_h_theta, sample_dihedral};
pub use energy::{excluded_pair, pairwise_energy, pairwise_energy_brute, BackboneRole, PairEnergy, SiteAtom};
pub use geometry::{
    dihedral, measure_triple, place_atom, place_next_backbone, wrap_degrees, BackboneGeometry, DihedralTriple, Vec3,
};
pub use grid::SpatialGrid;
pub use segment::{closure_feasible, EnergyBreakdown, HostOptions, ProteinModel, ProteinStep, SegmentProblem};

/// Boltzmann temperature; fixed.
pub const LAMBDA: f64 = 1.0;
/// Weight of the pairwise term relative to the dihedral term.
pub const PAIR_WEIGHT: f64 = 0.1;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ProteinError {
    #[error("collinear placement frame")]
    DegenerateFrame,
    #[error("geometry: {0}")]
    Geometry(String),
    #[error("no dihedral table for amino acid `{0}`")]
    UnknownAminoAcid(String),
    #[error("no potential type for atom {atom} of {residue}")]
    MissingAtomType { residue: String, atom: String },
    #[error("closure table has no row for {0} remaining steps")]
    RangeTableMiss(usize),
    #[error("missing atom {name} of residue {chain}{res_seq}")]
    MissingAtom { chain: char, res_seq: i32, name: String },
    #[error("segment: {0}")]
    Segment(String),
}
