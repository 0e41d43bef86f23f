//! Structural quantities of sampled segments.

use crate::protein::{excluded_pair, BackboneRole, ProteinError, ProteinModel, ProteinStep, SiteAtom, SpatialGrid};
use crate::smc::{estimate, EstimateReport, Particle, SmcError, Statistic};

/// Atoms within `radius` of the `Cα` of one residue are counted as contacts.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContactSpec {
    pub chain: char,
    pub res_seq: i32,
    pub radius: f64,
}

impl ContactSpec {
    pub const DEFAULT_RADIUS: f64 = 7.0;

    pub fn new(chain: char, res_seq: i32) -> Self {
        Self { chain, res_seq, radius: Self::DEFAULT_RADIUS }
    }
}

fn find_ca(atoms: &[SiteAtom], chain: char, res_seq: i32) -> Result<&SiteAtom, ProteinError> {
    atoms
        .iter()
        .find(|a| a.chain == chain && a.res_seq == res_seq && a.role == BackboneRole::CA)
        .ok_or(ProteinError::MissingAtom { chain, res_seq, name: "CA".into() })
}

/// Distance between the `Cα` atoms of residues `i` and `j`.
pub fn ca_distance(atoms: &[SiteAtom], chain: char, i: i32, j: i32) -> Result<f64, ProteinError> {
    Ok((find_ca(atoms, chain, i)?.pos - find_ca(atoms, chain, j)?.pos).norm())
}

fn is_contact(center: &SiteAtom, other: &SiteAtom, radius: f64) -> bool {
    !excluded_pair(center, other) && (other.pos - center.pos).norm() <= radius
}

/// Atoms other than the center's own residue and bonded partners within
/// `spec.radius` (inclusive), by scanning every atom.
pub fn atomic_contacts(atoms: &[SiteAtom], spec: &ContactSpec) -> Result<usize, ProteinError> {
    let center = find_ca(atoms, spec.chain, spec.res_seq)?;
    Ok(atoms.iter().filter(|a| is_contact(center, a, spec.radius)).count())
}

/// Contact counts against a fixed atom set through a spatial grid.
#[derive(Debug, Clone)]
pub struct ContactCounter {
    atoms: Vec<SiteAtom>,
    grid: SpatialGrid,
}

impl ContactCounter {
    /// `cell` is the grid spacing; queries of any radius are exact.
    pub fn new(atoms: Vec<SiteAtom>, cell: f64) -> Self {
        let grid = SpatialGrid::new(atoms.iter().map(|a| a.pos).collect(), cell);
        Self { atoms, grid }
    }

    pub fn atoms(&self) -> &[SiteAtom] {
        &self.atoms
    }

    /// Contacts of `center` among the indexed atoms.
    pub fn count(&self, center: &SiteAtom, radius: f64, scratch: &mut Vec<usize>) -> usize {
        self.grid.within(&center.pos, radius, scratch);
        scratch.iter().filter(|&&j| !excluded_pair(center, &self.atoms[j])).count()
    }

    pub fn contacts(&self, spec: &ContactSpec) -> Result<usize, ProteinError> {
        let center = *find_ca(&self.atoms, spec.chain, spec.res_seq)?;
        Ok(self.count(&center, spec.radius, &mut Vec::new()))
    }
}

/// One scalar per item, evaluated on a sampled segment.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SegmentQuantity {
    /// Contacts of the `Cα` of a residue.
    Contacts(i32),
    /// `Cα`-`Cα` distance between two residues.
    CaDistance(i32, i32),
}

impl SegmentQuantity {
    pub fn label(&self) -> String {
        match self {
            Self::Contacts(r) => format!("n(CA_{r})"),
            Self::CaDistance(i, j) => format!("d(CA_{i},CA_{j})"),
        }
    }
}

/// Segment quantities as a vector-valued [`Statistic`] of protein paths.
///
/// Contacts count host atoms and, when `include_segment` is set, the other
/// placed segment atoms.
#[derive(Debug, Clone)]
pub struct SegmentStatistics<'m> {
    model: &'m ProteinModel,
    name: String,
    pub items: Vec<SegmentQuantity>,
    pub radius: f64,
    pub include_segment: bool,
    host: ContactCounter,
}

impl<'m> SegmentStatistics<'m> {
    pub fn new(model: &'m ProteinModel, name: impl Into<String>, items: Vec<SegmentQuantity>, radius: f64) -> Self {
        assert!(radius > 0.0, "contact radius must be positive");
        let host = ContactCounter::new(model.host_atoms().to_vec(), radius);
        Self { model, name: name.into(), items, radius, include_segment: true, host }
    }

    /// Contacts of every `Cα` the segment places.
    pub fn placed_contacts(model: &'m ProteinModel, radius: f64) -> Self {
        let items = model.problem().placed_ca_residues().map(SegmentQuantity::Contacts).collect();
        Self::new(model, "contacts", items, radius)
    }

    pub fn labels(&self) -> Vec<String> {
        self.items.iter().map(SegmentQuantity::label).collect()
    }

    /// Values on a complete path; fails when a residue has no `Cα`.
    pub fn try_eval(&self, path: &[ProteinStep]) -> Result<Vec<f64>, ProteinError> {
        let chain = self.model.problem().chain;
        let segment = self.model.segment_atoms(path);
        let mut scratch = Vec::new();
        let all: Vec<SiteAtom>;
        let atoms_for_distance = if segment.is_empty() {
            self.host.atoms()
        } else {
            all = segment.iter().chain(self.host.atoms()).copied().collect();
            &all
        };
        self.items
            .iter()
            .map(|item| match *item {
                SegmentQuantity::Contacts(r) => {
                    let center = *find_ca(atoms_for_distance, chain, r)?;
                    let mut n = self.host.count(&center, self.radius, &mut scratch);
                    if self.include_segment {
                        n += segment.iter().filter(|a| is_contact(&center, a, self.radius)).count();
                    }
                    Ok(n as f64)
                }
                SegmentQuantity::CaDistance(i, j) => ca_distance(atoms_for_distance, chain, i, j),
            })
            .collect()
    }
}

impl Statistic<ProteinStep> for SegmentStatistics<'_> {
    fn name(&self) -> &str {
        &self.name
    }

    fn eval(&self, path: &[ProteinStep]) -> Vec<f64> {
        self.try_eval(path).unwrap_or_else(|e| panic!("statistic `{}`: {e}", self.name))
    }
}

/// Weighted averages of several statistics over one ensemble.
pub fn boltzmann_average<S>(
    particles: &[Particle<S>],
    stats: &[&dyn Statistic<S>],
) -> Result<Vec<EstimateReport>, SmcError> {
    stats.iter().map(|s| estimate(particles, *s)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::protein::Vec3;

    fn atom(x: f64, y: f64, res_seq: i32, role: BackboneRole) -> SiteAtom {
        SiteAtom { pos: Vec3::new(x, y, 0.0), kind: 0, chain: 'A', res_seq, role }
    }

    #[test]
    fn distances() {
        let atoms = [atom(0.0, 0.0, 1, BackboneRole::CA), atom(3.0, 4.0, 2, BackboneRole::CA)];
        assert_eq!(ca_distance(&atoms, 'A', 1, 2).unwrap(), 5.0);
        assert_eq!(ca_distance(&atoms, 'A', 1, 1).unwrap(), 0.0);
        assert!(matches!(ca_distance(&atoms, 'A', 1, 3), Err(ProteinError::MissingAtom { res_seq: 3, .. })));
    }

    #[test]
    fn radius_is_inclusive() {
        let spec = ContactSpec::new('A', 1);
        let at = |x| [atom(0.0, 0.0, 1, BackboneRole::CA), atom(x, 0.0, 5, BackboneRole::O)];
        assert_eq!(atomic_contacts(&at(7.1), &spec).unwrap(), 0);
        assert_eq!(atomic_contacts(&at(7.0), &spec).unwrap(), 1);
        let same_residue = [atom(0.0, 0.0, 1, BackboneRole::CA), atom(1.5, 0.0, 1, BackboneRole::C)];
        assert_eq!(atomic_contacts(&same_residue, &spec).unwrap(), 0);
    }
}
