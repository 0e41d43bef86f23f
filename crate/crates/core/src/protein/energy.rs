use super::{SpatialGrid, Vec3};
use crate::tables::PotentialTable;

/// Backbone identity of an atom, used for the peptide-bond exclusion and
/// for selecting atoms by name.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BackboneRole {
    N,
    CA,
    C,
    O,
    Other,
}

impl BackboneRole {
    pub fn from_name(name: &str) -> Self {
        match name {
            "N" => Self::N,
            "CA" => Self::CA,
            "C" => Self::C,
            "O" => Self::O,
            _ => Self::Other,
        }
    }
}

/// An atom reduced to what the energy and the statistics need.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SiteAtom {
    pub pos: Vec3,
    /// Potential type index.
    pub kind: usize,
    pub chain: char,
    pub res_seq: i32,
    pub role: BackboneRole,
}

/// Pairs in one residue, and the `C(r)`-`N(r+1)` peptide bond, are skipped.
pub fn excluded_pair(a: &SiteAtom, b: &SiteAtom) -> bool {
    if a.chain != b.chain {
        return false;
    }
    a.res_seq == b.res_seq
        || (a.role == BackboneRole::C && b.role == BackboneRole::N && b.res_seq == a.res_seq + 1)
        || (b.role == BackboneRole::C && a.role == BackboneRole::N && a.res_seq == b.res_seq + 1)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairEnergy {
    /// Sum of table scores, `+inf` on a clash.
    pub h_a: f64,
    pub clash: bool,
}

impl PairEnergy {
    pub const ZERO: PairEnergy = PairEnergy { h_a: 0.0, clash: false };
    const CLASH: PairEnergy = PairEnergy { h_a: f64::INFINITY, clash: true };
}

/// Accumulates one pair; returns false on a clash.
#[inline]
fn add_pair(a: &SiteAtom, b: &SiteAtom, pot: &PotentialTable, h: &mut f64) -> bool {
    if excluded_pair(a, b) {
        return true;
    }
    let s = pot.score(a.kind, b.kind, (a.pos - b.pos).norm());
    if pot.is_clash(s) {
        return false;
    }
    *h += s;
    true
}

fn new_vs_new(new_atoms: &[SiteAtom], pot: &PotentialTable, h: &mut f64) -> bool {
    for (i, a) in new_atoms.iter().enumerate() {
        for b in &new_atoms[i + 1..] {
            if !add_pair(a, b, pot, h) {
                return false;
            }
        }
    }
    true
}

/// Energy of `new_atoms` against `context` and among themselves, over every
/// pair of `new × context` in order. Reference implementation.
pub fn pairwise_energy_brute(new_atoms: &[SiteAtom], context: &[SiteAtom], pot: &PotentialTable) -> PairEnergy {
    let mut h = 0.0;
    for a in new_atoms {
        for b in context {
            if !add_pair(a, b, pot, &mut h) {
                return PairEnergy::CLASH;
            }
        }
    }
    if !new_vs_new(new_atoms, pot, &mut h) {
        return PairEnergy::CLASH;
    }
    PairEnergy { h_a: h, clash: false }
}

/// Same sum as [`pairwise_energy_brute`], visiting only context atoms within
/// the table range through `grid` (built over `context` positions). Terms
/// are added in the same order, so the results are identical.
pub fn pairwise_energy(
    new_atoms: &[SiteAtom],
    context: &[SiteAtom],
    grid: &SpatialGrid,
    pot: &PotentialTable,
    scratch: &mut Vec<usize>,
) -> PairEnergy {
    debug_assert_eq!(grid.points().len(), context.len());
    let mut h = 0.0;
    for a in new_atoms {
        grid.within(&a.pos, pot.max_distance(), scratch);
        for &j in scratch.iter() {
            if !add_pair(a, &context[j], pot, &mut h) {
                return PairEnergy::CLASH;
            }
        }
    }
    if !new_vs_new(new_atoms, pot, &mut h) {
        return PairEnergy::CLASH;
    }
    PairEnergy { h_a: h, clash: false }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn atom(x: f64, res_seq: i32, role: BackboneRole) -> SiteAtom {
        SiteAtom { pos: Vec3::new(x, 0.0, 0.0), kind: 0, chain: 'A', res_seq, role }
    }

    fn table() -> PotentialTable {
        let mut t = PotentialTable::new(vec!["X".into()], 1.0, 6.0, 8.0).unwrap();
        t.set(0, 0, 1, 8.0);
        t.set(0, 0, 3, -0.5);
        t
    }

    #[test]
    fn exclusions() {
        let c = atom(0.0, 4, BackboneRole::C);
        assert!(excluded_pair(&c, &atom(1.0, 5, BackboneRole::N)));
        assert!(excluded_pair(&atom(1.0, 5, BackboneRole::N), &c));
        assert!(!excluded_pair(&c, &atom(1.0, 5, BackboneRole::CA)));
        assert!(!excluded_pair(&c, &atom(1.0, 3, BackboneRole::N)));
        assert!(excluded_pair(&c, &atom(1.0, 4, BackboneRole::Other)));
        let mut other_chain = atom(1.0, 4, BackboneRole::O);
        other_chain.chain = 'B';
        assert!(!excluded_pair(&c, &other_chain));
    }

    #[test]
    fn empty_range_clash_and_well() {
        let t = table();
        let a = [atom(0.0, 1, BackboneRole::CA)];
        assert_eq!(pairwise_energy_brute(&a, &[atom(7.0, 3, BackboneRole::CA)], &t), PairEnergy::ZERO);
        let e = pairwise_energy_brute(&a, &[atom(1.5, 3, BackboneRole::CA)], &t);
        assert!(e.clash && e.h_a == f64::INFINITY);
        let e = pairwise_energy_brute(&a, &[atom(3.5, 3, BackboneRole::CA), atom(-3.2, 0, BackboneRole::O)], &t);
        assert_eq!(e, PairEnergy { h_a: -1.0, clash: false });
        // Same residue: a clash distance is ignored.
        assert_eq!(pairwise_energy_brute(&a, &[atom(1.5, 1, BackboneRole::N)], &t), PairEnergy::ZERO);
    }
}
