use super::energy::{pairwise_energy, BackboneRole, PairEnergy, SiteAtom};
use super::geometry::{
    measure_triple, place_next_backbone, BackboneGeometry, DihedralTriple, Vec3, C, CA_NEXT, N_NEXT, O,
};
use super::{eval_h_theta, sample_dihedral, ProteinError, SpatialGrid, LAMBDA, PAIR_WEIGHT};
use crate::rng::StreamRng;
use crate::smc::SequentialModel;
use crate::tables::{
    AtomRecord, ClosureRangeTable, DihedralDistribution, EnergyTables, PotentialTable, ProteinStructure,
};

/// True iff `|C_t - target|` and `|Cα_{t+1} - target|` both lie in the
/// inclusive ranges for `steps_remaining`.
pub fn closure_feasible(
    c_pos: &Vec3,
    ca_pos: &Vec3,
    target_ca: &Vec3,
    steps_remaining: usize,
    ranges: &ClosureRangeTable,
) -> Result<bool, ProteinError> {
    let row = ranges.get(steps_remaining).ok_or(ProteinError::RangeTableMiss(steps_remaining))?;
    Ok(row.admits((c_pos - target_ca).norm(), (ca_pos - target_ca).norm()))
}

/// Which host atoms take part in the energy.
#[derive(Debug, Clone, PartialEq)]
pub struct HostOptions {
    /// Elements dropped from the host.
    pub exclude_elements: Vec<String>,
}

impl Default for HostOptions {
    fn default() -> Self {
        Self { exclude_elements: vec!["H".into(), "D".into()] }
    }
}

/// A segment of `length` residues starting at `start`, to be rebuilt inside
/// a fixed host.
#[derive(Debug, Clone, PartialEq)]
pub struct SegmentProblem {
    pub chain: char,
    pub start: i32,
    pub length: usize,
    /// Residue names of `start ..= start + length`.
    pub residues: Vec<String>,
    /// `C_{s-1}`, `N_s`, `Cα_s`.
    pub anchor: [Vec3; 3],
    /// `Cα_{s+T+2}`.
    pub target: Vec3,
    /// Fixed atoms: everything except hydrogens (by default) and the atoms
    /// the segment rebuilds or that hang off rebuilt atoms.
    pub host: Vec<AtomRecord>,
    /// Dihedrals of the segment in the input structure.
    pub native: Vec<DihedralTriple>,
}

impl SegmentProblem {
    pub fn from_structure(
        structure: &ProteinStructure,
        chain: char,
        start: i32,
        length: usize,
        options: &HostOptions,
    ) -> Result<Self, ProteinError> {
        if length == 0 {
            return Err(ProteinError::Segment("segment length must be at least 1".into()));
        }
        let last = start + length as i32 - 1;
        let atom = |res_seq: i32, name: &str| {
            structure.find(chain, res_seq, name).map(|a| a.pos).ok_or_else(|| ProteinError::MissingAtom {
                chain,
                res_seq,
                name: name.to_string(),
            })
        };
        let anchor = [atom(start - 1, "C")?, atom(start, "N")?, atom(start, "CA")?];
        let target = atom(last + 2, "CA")?;
        let residues = (start..=last + 1)
            .map(|r| {
                structure.residue_name(chain, r).map(str::to_string).ok_or_else(|| ProteinError::MissingAtom {
                    chain,
                    res_seq: r,
                    name: "CA".into(),
                })
            })
            .collect::<Result<Vec<_>, _>>()?;

        let rebuilt = |a: &AtomRecord| {
            if a.chain != chain {
                return false;
            }
            let role = BackboneRole::from_name(&a.name);
            if a.res_seq == start {
                !matches!(role, BackboneRole::N | BackboneRole::CA)
            } else if a.res_seq == last + 1 {
                !matches!(role, BackboneRole::C | BackboneRole::O)
            } else {
                a.res_seq > start && a.res_seq <= last
            }
        };
        let host = structure
            .atoms
            .iter()
            .filter(|a| !rebuilt(a) && !options.exclude_elements.iter().any(|e| e == &a.element))
            .cloned()
            .collect();

        let mut native = Vec::with_capacity(length);
        let mut frame = anchor;
        for r in start..=last {
            let placed = [atom(r, "C"), atom(r, "O"), atom(r + 1, "N"), atom(r + 1, "CA")];
            if placed.iter().any(Result::is_err) {
                native.clear();
                break;
            }
            let placed = placed.map(Result::unwrap);
            native.push(measure_triple(&frame, &placed));
            frame = [placed[C], placed[N_NEXT], placed[CA_NEXT]];
        }

        Ok(Self { chain, start, length, residues, anchor, target, host, native })
    }

    /// `T`, the index of the last state.
    pub fn horizon(&self) -> usize {
        self.length - 1
    }

    /// Residue numbers whose `Cα` the segment places: `s+1 ..= s+T+1`.
    pub fn placed_ca_residues(&self) -> impl Iterator<Item = i32> + '_ {
        (1..=self.length as i32).map(move |k| self.start + k)
    }
}

/// One state: the dihedrals of a residue and the four atoms they place.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProteinStep {
    pub triple: DihedralTriple,
    /// `C_t`, `O_t`, `N_{t+1}`, `Cα_{t+1}`; non-finite if placement failed.
    pub atoms: [Vec3; 4],
}

impl ProteinStep {
    fn is_finite(&self) -> bool {
        self.atoms.iter().all(|a| a.iter().all(|v| v.is_finite()))
    }
}

/// Energy of adding one residue.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyBreakdown {
    pub h_a: f64,
    pub h_theta: f64,
    pub clash: bool,
    pub closure_ok: bool,
    /// `h_a / 10 + h_theta`, or `+inf` on a clash or failed closure.
    pub total: f64,
}

/// The segment as a [`SequentialModel`] with dihedral-table proposals.
#[derive(Debug, Clone)]
pub struct ProteinModel {
    problem: SegmentProblem,
    geometry: BackboneGeometry,
    potential: PotentialTable,
    closure: ClosureRangeTable,
    dists: Vec<DihedralDistribution>,
    host: Vec<SiteAtom>,
    grid: SpatialGrid,
    /// Potential types of the four atoms placed at each step.
    kinds: Vec<[usize; 4]>,
}

impl ProteinModel {
    pub fn new(
        problem: SegmentProblem,
        tables: &EnergyTables,
        geometry: BackboneGeometry,
    ) -> Result<Self, ProteinError> {
        geometry.validate()?;
        let typer = tables.potential.typer();
        let kind_of = |res: &str, name: &str, element: &str| {
            typer
                .resolve(res, name, element)
                .ok_or_else(|| ProteinError::MissingAtomType { residue: res.to_string(), atom: name.to_string() })
        };
        let host = problem
            .host
            .iter()
            .map(|a| {
                Ok(SiteAtom {
                    pos: a.pos,
                    kind: kind_of(&a.res_name, &a.name, &a.element)?,
                    chain: a.chain,
                    res_seq: a.res_seq,
                    role: BackboneRole::from_name(&a.name),
                })
            })
            .collect::<Result<Vec<_>, ProteinError>>()?;
        let mut kinds = Vec::with_capacity(problem.length);
        let mut dists = Vec::with_capacity(problem.length);
        for t in 0..problem.length {
            let (this, next) = (&problem.residues[t], &problem.residues[t + 1]);
            dists
                .push(tables.dihedrals.get(this).cloned().ok_or_else(|| ProteinError::UnknownAminoAcid(this.clone()))?);
            kinds.push([
                kind_of(this, "C", "C")?,
                kind_of(this, "O", "O")?,
                kind_of(next, "N", "N")?,
                kind_of(next, "CA", "C")?,
            ]);
        }
        let horizon = problem.horizon();
        if tables.closure.get(horizon).is_none() {
            return Err(ProteinError::RangeTableMiss(horizon));
        }
        // Rejects a collinear anchor up front.
        place_next_backbone(&problem.anchor, &DihedralTriple::new(-60.0, -40.0, 180.0), &geometry)?;
        let grid = SpatialGrid::new(host.iter().map(|a| a.pos).collect(), tables.potential.max_distance());
        Ok(Self {
            problem,
            geometry,
            potential: tables.potential.clone(),
            closure: tables.closure.clone(),
            dists,
            host,
            grid,
            kinds,
        })
    }

    pub fn problem(&self) -> &SegmentProblem {
        &self.problem
    }

    pub fn geometry(&self) -> &BackboneGeometry {
        &self.geometry
    }

    pub fn potential(&self) -> &PotentialTable {
        &self.potential
    }

    pub fn closure(&self) -> &ClosureRangeTable {
        &self.closure
    }

    pub fn host_atoms(&self) -> &[SiteAtom] {
        &self.host
    }

    pub fn dihedral_distribution(&self, t: usize) -> &DihedralDistribution {
        &self.dists[t]
    }

    fn frame(&self, prefix: &[ProteinStep]) -> [Vec3; 3] {
        match prefix.last() {
            None => self.problem.anchor,
            Some(p) => [p.atoms[C], p.atoms[N_NEXT], p.atoms[CA_NEXT]],
        }
    }

    pub fn place(&self, prefix: &[ProteinStep], triple: &DihedralTriple) -> Result<[Vec3; 4], ProteinError> {
        place_next_backbone(&self.frame(prefix), triple, &self.geometry)
    }

    /// The four atoms placed at step `t`, typed for the energy.
    pub fn step_atoms(&self, t: usize, atoms: &[Vec3; 4]) -> [SiteAtom; 4] {
        let (chain, r) = (self.problem.chain, self.problem.start + t as i32);
        let k = &self.kinds[t];
        let site = |i: usize, res_seq, role| SiteAtom { pos: atoms[i], kind: k[i], chain, res_seq, role };
        [
            site(C, r, BackboneRole::C),
            site(O, r, BackboneRole::O),
            site(N_NEXT, r + 1, BackboneRole::N),
            site(CA_NEXT, r + 1, BackboneRole::CA),
        ]
    }

    /// All atoms placed along `path`, in placement order.
    pub fn segment_atoms(&self, path: &[ProteinStep]) -> Vec<SiteAtom> {
        path.iter().enumerate().flat_map(|(t, s)| self.step_atoms(t, &s.atoms)).collect()
    }

    /// Pair energy of step `prefix.len()` against the host, the earlier
    /// segment atoms, and itself.
    fn step_pair_energy(&self, prefix: &[ProteinStep], atoms: &[Vec3; 4]) -> PairEnergy {
        let new = self.step_atoms(prefix.len(), atoms);
        let mut scratch = Vec::with_capacity(64);
        let host = pairwise_energy(&new, &self.host, &self.grid, &self.potential, &mut scratch);
        if host.clash {
            return host;
        }
        let mut h = host.h_a;
        for (t, s) in prefix.iter().enumerate() {
            for b in self.step_atoms(t, &s.atoms) {
                for a in &new {
                    if super::excluded_pair(a, &b) {
                        continue;
                    }
                    let score = self.potential.score(a.kind, b.kind, (a.pos - b.pos).norm());
                    if self.potential.is_clash(score) {
                        return PairEnergy { h_a: f64::INFINITY, clash: true };
                    }
                    h += score;
                }
            }
        }
        PairEnergy { h_a: h, clash: false }
    }

    fn closure_ok(&self, t: usize, atoms: &[Vec3; 4]) -> bool {
        closure_feasible(&atoms[C], &atoms[CA_NEXT], &self.problem.target, self.problem.horizon() - t, &self.closure)
            .expect("closure rows checked at construction")
    }

    /// Places `triple` after `prefix` and evaluates the full energy of the
    /// new residue.
    pub fn incremental_energy(
        &self,
        prefix: &[ProteinStep],
        triple: &DihedralTriple,
    ) -> Result<(EnergyBreakdown, [Vec3; 4]), ProteinError> {
        let t = prefix.len();
        if t > self.problem.horizon() {
            return Err(ProteinError::Segment(format!("step {t} beyond horizon {}", self.problem.horizon())));
        }
        let atoms = self.place(prefix, triple)?;
        let pair = self.step_pair_energy(prefix, &atoms);
        let closure_ok = self.closure_ok(t, &atoms);
        let h_theta = eval_h_theta(triple, &self.dists[t]);
        let total = if closure_ok && !pair.clash { PAIR_WEIGHT * pair.h_a + h_theta } else { f64::INFINITY };
        Ok((EnergyBreakdown { h_a: pair.h_a, h_theta, clash: pair.clash, closure_ok, total }, atoms))
    }

    fn draw(&self, prefix: &[ProteinStep], rng: &mut StreamRng) -> ProteinStep {
        let triple = sample_dihedral(&self.dists[prefix.len()], rng);
        let atoms = self.place(prefix, &triple).unwrap_or([Vec3::repeat(f64::NAN); 4]);
        ProteinStep { triple, atoms }
    }

    fn increment(&self, prefix: &[ProteinStep], x: &ProteinStep) -> f64 {
        if !x.is_finite() || !self.closure_ok(prefix.len(), &x.atoms) {
            return f64::NEG_INFINITY;
        }
        let pair = self.step_pair_energy(prefix, &x.atoms);
        if pair.clash {
            f64::NEG_INFINITY
        } else {
            -PAIR_WEIGHT * pair.h_a / LAMBDA
        }
    }
}

impl SequentialModel for ProteinModel {
    type State = ProteinStep;

    fn horizon(&self) -> usize {
        self.problem.horizon()
    }

    fn initial_propose(&self, rng: &mut StreamRng) -> ProteinStep {
        self.draw(&[], rng)
    }

    /// The dihedral term cancels against the proposal, leaving
    /// `-H_a / 10` and the closure indicator.
    fn initial_log_increment(&self, x0: &ProteinStep) -> f64 {
        self.increment(&[], x0)
    }

    fn propose(&self, prefix: &[ProteinStep], rng: &mut StreamRng) -> ProteinStep {
        self.draw(prefix, rng)
    }

    fn log_increment(&self, prefix: &[ProteinStep], x: &ProteinStep) -> f64 {
        self.increment(prefix, x)
    }
}
