use crate::weights;

/// One weighted path `x_{0:t}`.
#[derive(Debug, Clone, PartialEq)]
pub struct Particle<S> {
    pub path: Vec<S>,
    /// Natural log of the unnormalized weight; `-inf` is weight zero.
    pub log_weight: f64,
    /// Index of the candidate this particle was materialized from in the
    /// step that created it. Equal origins mean duplicated paths.
    pub origin: usize,
}

/// The `N` weighted paths carried between steps.
#[derive(Debug, Clone, PartialEq)]
pub struct ParticleEnsemble<S> {
    particles: Vec<Particle<S>>,
    normalized: bool,
}

impl<S> ParticleEnsemble<S> {
    /// `n` empty paths with equal weights; the state before any proposal.
    pub fn root(n: usize) -> Self {
        let lw = -(n as f64).ln();
        let particles = (0..n).map(|i| Particle { path: Vec::new(), log_weight: lw, origin: i }).collect();
        Self { particles, normalized: true }
    }

    pub fn from_particles(particles: Vec<Particle<S>>, normalized: bool) -> Self {
        Self { particles, normalized }
    }

    pub fn particles(&self) -> &[Particle<S>] {
        &self.particles
    }

    pub fn into_particles(self) -> Vec<Particle<S>> {
        self.particles
    }

    pub fn len(&self) -> usize {
        self.particles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.particles.is_empty()
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    /// Length of every path in the ensemble.
    pub fn path_len(&self) -> usize {
        self.particles.first().map_or(0, |p| p.path.len())
    }

    /// Index `t` of the most recent state, `None` before the first step.
    pub fn step(&self) -> Option<usize> {
        self.path_len().checked_sub(1)
    }

    pub fn log_weights(&self) -> Vec<f64> {
        self.particles.iter().map(|p| p.log_weight).collect()
    }

    /// Rescale weights to sum to one.
    pub fn normalize(&mut self) {
        let lse = weights::log_sum_exp(&self.log_weights());
        if lse.is_finite() {
            for p in &mut self.particles {
                p.log_weight -= lse;
            }
            self.normalized = true;
        }
    }

    pub fn n_distinct(&self) -> usize {
        let mut origins: Vec<usize> = self.particles.iter().map(|p| p.origin).collect();
        origins.sort_unstable();
        origins.dedup();
        origins.len()
    }
}

/// One proposed child `(n, m)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Candidate<S> {
    pub parent: usize,
    pub child: usize,
    pub state: S,
    pub log_weight: f64,
}

/// The `M·N` children of an ensemble, before downsampling.
///
/// Children reference their parent path rather than copying it; only the
/// survivors of downsampling are materialized into full paths.
#[derive(Debug, Clone)]
pub struct UpsampledSet<'a, S> {
    parents: &'a [Particle<S>],
    m: usize,
    candidates: Vec<Candidate<S>>,
    positive_count: usize,
}

impl<'a, S: Clone> UpsampledSet<'a, S> {
    pub(crate) fn new(parents: &'a [Particle<S>], m: usize, candidates: Vec<Candidate<S>>) -> Self {
        let positive_count = candidates.iter().filter(|c| c.log_weight > f64::NEG_INFINITY).count();
        Self { parents, m, candidates, positive_count }
    }

    pub fn candidates(&self) -> &[Candidate<S>] {
        &self.candidates
    }

    pub fn len(&self) -> usize {
        self.candidates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.candidates.is_empty()
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn positive_count(&self) -> usize {
        self.positive_count
    }

    pub fn log_weights(&self) -> Vec<f64> {
        self.candidates.iter().map(|c| c.log_weight).collect()
    }

    /// Full path of candidate `index` with the given weight.
    pub fn particle(&self, index: usize, log_weight: f64) -> Particle<S> {
        let c = &self.candidates[index];
        let prefix = &self.parents[c.parent].path;
        let mut path = Vec::with_capacity(prefix.len() + 1);
        path.extend_from_slice(prefix);
        path.push(c.state.clone());
        Particle { path, log_weight, origin: index }
    }

    /// Every candidate as a particle with its upsampled weight.
    pub fn into_ensemble(self) -> ParticleEnsemble<S> {
        let particles = (0..self.candidates.len()).map(|i| self.particle(i, self.candidates[i].log_weight)).collect();
        ParticleEnsemble::from_particles(particles, false)
    }

    /// Survivors `selected[k]` with weights `log_weights[k]`.
    pub fn select(&self, selected: &[usize], log_weights: &[f64]) -> ParticleEnsemble<S> {
        let particles = selected.iter().zip(log_weights).map(|(&i, &lw)| self.particle(i, lw)).collect();
        ParticleEnsemble::from_particles(particles, true)
    }
}
