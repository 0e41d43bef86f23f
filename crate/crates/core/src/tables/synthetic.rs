//! Synthetic stand-ins for the pairwise potential, dihedral distributions
//! and closure ranges, plus a small protein to rebuild segments in.

use std::path::{Path, PathBuf};

use rand::Rng;

use super::closure::{ClosureRange, ClosureRangeTable};
use super::dihedral::{DihedralDistribution, DihedralDistributionSet, BINS, BIN_DEGREES};
use super::pdb::{AtomRecord, ProteinStructure};
use super::potential::PotentialTable;
use super::{write_closure_ranges, write_dihedral_tables, write_pdb, write_potential_table, EnergyTables, TableError};
use crate::protein::{place_atom, place_next_backbone, wrap_degrees, BackboneGeometry, DihedralTriple, Vec3};
use crate::rng::{Domain, StreamKey};

/// Slack (Å) on generated closure bounds so that conformations exactly at
/// a bound survive rounding.
const CLOSURE_SLACK: f64 = 1e-9;

/// Residues of the mini protein, repeated along the chain.
const RESIDUE_CYCLE: [&str; 10] = ["MET", "ALA", "LEU", "GLU", "LYS", "SER", "GLY", "VAL", "ASP", "THR"];

/// Ramachandran-like modes `(φ, ψ, weight)`: right-handed helix, strand,
/// left-handed helix.
const MODES: [(f64, f64, f64); 3] = [(-63.0, -43.0, 0.5), (-120.0, 130.0, 0.35), (57.0, 47.0, 0.15)];

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticSpec {
    pub types: Vec<String>,
    /// Type used for atoms no other rule matches.
    pub fallback: String,
    pub bin_width: f64,
    pub max_distance: f64,
    pub sentinel: f64,
    /// Every distance below this falls in a sentinel bin.
    pub clash_cutoff: f64,
    /// Mean depth, position and width (Å) of the attractive well.
    pub well_depth: f64,
    pub well_center: f64,
    pub well_width: f64,
    /// Standard deviation (degrees) of each dihedral mode.
    pub dihedral_spread: f64,
    pub omega_mean: f64,
    pub omega_sd: f64,
    pub residues: Vec<String>,
    /// Closure rows `0 ..= closure_steps`.
    pub closure_steps: usize,
    pub geometry: BackboneGeometry,
    /// Residues in the mini protein.
    pub protein_length: usize,
}

impl Default for SyntheticSpec {
    fn default() -> Self {
        Self {
            types: ["N", "CA", "C", "O", "CB", "X"].map(String::from).to_vec(),
            fallback: "X".into(),
            bin_width: 0.5,
            max_distance: 10.0,
            sentinel: 8.0,
            clash_cutoff: 2.0,
            well_depth: 0.6,
            well_center: 4.5,
            well_width: 1.2,
            dihedral_spread: 15.0,
            omega_mean: 180.0,
            omega_sd: 3.0,
            residues: RESIDUE_CYCLE.map(String::from).to_vec(),
            closure_steps: 30,
            geometry: BackboneGeometry::default(),
            protein_length: 24,
        }
    }
}

impl SyntheticSpec {
    pub fn potential(&self, seed: u64) -> Result<PotentialTable, TableError> {
        let mut table = PotentialTable::new(self.types.clone(), self.bin_width, self.max_distance, self.sentinel)?;
        table.set_fallback(Some(&self.fallback))?;
        let mut rng = StreamKey::new(seed).rng(Domain::Synthetic, 0, 0, 0);
        let k = self.types.len();
        for a in 0..k {
            for b in a..k {
                let depth = self.well_depth * (0.5 + rng.random::<f64>());
                for bin in 0..table.n_bins() {
                    let lo = bin as f64 * self.bin_width;
                    let score = if lo < self.clash_cutoff {
                        self.sentinel
                    } else {
                        let mid = lo + 0.5 * self.bin_width;
                        let z = (mid - self.well_center) / self.well_width;
                        -depth * (-0.5 * z * z).exp()
                    };
                    table.set(a, b, bin, score);
                }
            }
        }
        Ok(table)
    }

    pub fn dihedrals(&self, seed: u64) -> Result<DihedralDistributionSet, TableError> {
        let mut set = DihedralDistributionSet::new();
        for (i, residue) in self.residues.iter().enumerate() {
            let mut rng = StreamKey::new(seed).rng(Domain::Synthetic, 1, i as u64, 0);
            let weights: Vec<f64> = MODES.iter().map(|m| m.2 * (0.5 + rng.random::<f64>())).collect();
            let s2 = 2.0 * self.dihedral_spread * self.dihedral_spread;
            let mut mass = Vec::with_capacity(BINS * BINS);
            for p in 0..BINS {
                let phi = -180.0 + BIN_DEGREES * (p as f64 + 0.5);
                for q in 0..BINS {
                    let psi = -180.0 + BIN_DEGREES * (q as f64 + 0.5);
                    let density: f64 = MODES
                        .iter()
                        .zip(&weights)
                        .map(|(m, w)| {
                            let (dp, dq) = (wrap_degrees(phi - m.0), wrap_degrees(psi - m.1));
                            w * (-(dp * dp + dq * dq) / s2).exp()
                        })
                        .sum();
                    mass.push(density + 1e-12);
                }
            }
            let total: f64 = mass.iter().sum();
            mass.iter_mut().for_each(|v| *v /= total);
            set.insert(residue.clone(), DihedralDistribution::new(residue, mass, self.omega_mean, self.omega_sd)?);
        }
        Ok(set)
    }

    /// Bounds implied by the geometry: each peptide spans between the cis
    /// and trans `Cα`-`Cα` distances, and `C_t` sits a fixed distance from
    /// `Cα_{t+1}`.
    pub fn closure(&self) -> Result<ClosureRangeTable, TableError> {
        let g = &self.geometry;
        let (cis, trans, c_ca) = (g.ca_ca_span(0.0), g.ca_ca_span(180.0), g.c_ca_span());
        let rows = (0..=self.closure_steps)
            .map(|k| {
                let max_ca = (k + 1) as f64 * trans;
                let min_ca = (cis - k as f64 * trans).max(0.0);
                ClosureRange {
                    min_c: (min_ca - c_ca - CLOSURE_SLACK).max(0.0),
                    max_c: c_ca + max_ca + CLOSURE_SLACK,
                    min_ca: (min_ca - CLOSURE_SLACK).max(0.0),
                    max_ca: max_ca + CLOSURE_SLACK,
                }
            })
            .collect();
        ClosureRangeTable::new(rows)
    }

    pub fn tables(&self, seed: u64) -> Result<EnergyTables, TableError> {
        Ok(EnergyTables {
            potential: self.potential(seed)?,
            dihedrals: self.dihedrals(seed)?,
            closure: self.closure()?,
        })
    }
}

/// First residue of the loop in the mini protein.
pub const MINI_LOOP_START: i32 = 10;
/// Residues in that loop.
pub const MINI_LOOP_LENGTH: usize = 6;

/// Dihedrals of the mini protein: a helix, the loop and a second helix.
fn mini_protein_dihedrals(n: usize) -> Vec<DihedralTriple> {
    const LOOP: [(f64, f64); MINI_LOOP_LENGTH] =
        [(-80.0, 150.0), (-70.0, 140.0), (60.0, 40.0), (-90.0, 0.0), (-120.0, 130.0), (-65.0, 145.0)];
    let first = MINI_LOOP_START as usize;
    (1..=n)
        .map(|r| {
            let (phi, psi) =
                if (first..first + MINI_LOOP_LENGTH).contains(&r) { LOOP[r - first] } else { (-57.0, -47.0) };
            DihedralTriple::new(phi, psi, 180.0)
        })
        .collect()
}

/// Backbone plus `Cβ` atoms of a `spec.protein_length`-residue chain `A`
/// built with `spec.geometry`; residues are numbered from 1.
pub fn synthetic_mini_protein(spec: &SyntheticSpec) -> ProteinStructure {
    let g = &spec.geometry;
    let theta = g.angle_c_n_ca.to_radians();
    let mut frame =
        [Vec3::new(g.c_n * theta.cos(), g.c_n * theta.sin(), 0.0), Vec3::zeros(), Vec3::new(g.n_ca, 0.0, 0.0)];
    let mut atoms = Vec::new();
    for (i, triple) in mini_protein_dihedrals(spec.protein_length).iter().enumerate() {
        let res_seq = i as i32 + 1;
        let res_name = RESIDUE_CYCLE[i % RESIDUE_CYCLE.len()];
        let placed = place_next_backbone(&frame, triple, g).expect("valid frame");
        let (n, ca, c, o) = (frame[1], frame[2], placed[0], placed[1]);
        let mut push = |name: &str, pos: Vec3| {
            atoms.push(AtomRecord {
                serial: atoms.len() as u32 + 1,
                name: name.into(),
                res_name: res_name.into(),
                chain: 'A',
                res_seq,
                pos,
                occupancy: 1.0,
                b_factor: 0.0,
                element: name[..1].into(),
            });
        };
        push("N", n);
        push("CA", ca);
        push("C", c);
        push("O", o);
        if res_name != "GLY" {
            push("CB", place_atom(&c, &n, &ca, 1.53, 110.5, -122.6).expect("valid frame"));
        }
        frame = [c, placed[2], placed[3]];
    }
    ProteinStructure { atoms }
}

/// Paths written by [`generate_synthetic_tables`].
#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticFiles {
    pub potential: PathBuf,
    pub dihedrals: PathBuf,
    pub closure: PathBuf,
    pub pdb: PathBuf,
}

pub fn generate_synthetic_tables(
    spec: &SyntheticSpec,
    seed: u64,
    out_dir: &Path,
) -> Result<SyntheticFiles, TableError> {
    std::fs::create_dir_all(out_dir).map_err(|source| TableError::Io { path: out_dir.to_path_buf(), source })?;
    let files = SyntheticFiles {
        potential: out_dir.join("potential.tbl"),
        dihedrals: out_dir.join("dihedral.tbl"),
        closure: out_dir.join("closure.tbl"),
        pdb: out_dir.join("mini.pdb"),
    };
    let tables = spec.tables(seed)?;
    write_potential_table(&tables.potential, &files.potential)?;
    write_dihedral_tables(&tables.dihedrals, &files.dihedrals)?;
    write_closure_ranges(&tables.closure, &files.closure)?;
    write_pdb(&synthetic_mini_protein(spec), &files.pdb)?;
    Ok(files)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn clash_bins_carry_the_sentinel() {
        let spec = SyntheticSpec::default();
        let t = spec.potential(1).unwrap();
        for a in 0..t.types().len() {
            for b in 0..t.types().len() {
                for bin in 0..t.n_bins() {
                    let v = t.get(a, b, bin);
                    assert_eq!(t.is_clash(v), (bin as f64) * t.bin_width() < spec.clash_cutoff);
                    assert_eq!(v, t.get(b, a, bin));
                }
            }
        }
        assert!(t.score(0, 1, 1.99).eq(&8.0) && t.score(0, 1, 2.0) < 0.0);
    }

    #[test]
    fn dihedral_tables_are_normalized_and_seeded() {
        let spec = SyntheticSpec::default();
        let a = spec.dihedrals(5).unwrap();
        for r in a.residues() {
            let sum: f64 = a.get(r).unwrap().masses().iter().sum();
            assert!((sum - 1.0).abs() < 1e-12);
        }
        assert_eq!(a, spec.dihedrals(5).unwrap());
        assert_ne!(a, spec.dihedrals(6).unwrap());
    }

    #[test]
    fn mini_protein_has_consistent_bonds() {
        let spec = SyntheticSpec::default();
        let s = synthetic_mini_protein(&spec);
        assert_eq!(s.atoms.iter().filter(|a| a.name == "CA").count(), spec.protein_length);
        for r in 1..spec.protein_length as i32 {
            let c = s.find('A', r, "C").unwrap().pos;
            let n = s.find('A', r + 1, "N").unwrap().pos;
            assert!(((c - n).norm() - spec.geometry.c_n).abs() < 1e-9);
        }
    }
}
