use rayon::prelude::*;

use super::{Candidate, ParticleEnsemble, SequentialModel, UpsampledSet};
use crate::rng::{Domain, StreamKey};

const MIN_PAR_CHUNK: usize = 64;

/// Propose `m` children for every particle of `ensemble`.
///
/// Child `(n, j)` draws from the stream `(step, n, j)` and gets
/// `log_weight(parent) + log_increment`; nothing is renormalized here.
/// Candidates are laid out parent-major: index `n·m + j`.
pub fn upsample_step<'a, M: SequentialModel>(
    ensemble: &'a ParticleEnsemble<M::State>,
    model: &M,
    m: usize,
    key: StreamKey,
) -> UpsampledSet<'a, M::State> {
    assert!(m >= 1, "upsample size must be at least 1");
    let step = ensemble.path_len();
    assert!(step <= model.horizon(), "ensemble already holds complete paths");
    let parents = ensemble.particles();
    let candidates: Vec<Candidate<M::State>> = (0..parents.len() * m)
        .into_par_iter()
        .with_min_len(MIN_PAR_CHUNK)
        .map(|k| {
            let (parent, child) = (k / m, k % m);
            let p = &parents[parent];
            let mut rng = key.rng(Domain::Propose, step as u64, parent as u64, child as u64);
            let (state, increment) = model.extend(&p.path, &mut rng);
            debug_assert!(!increment.is_nan(), "model returned a NaN log increment");
            Candidate { parent, child, state, log_weight: p.log_weight + increment }
        })
        .collect();
    UpsampledSet::new(parents, m, candidates)
}
