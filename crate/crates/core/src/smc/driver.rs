use std::time::{Duration, Instant};

use rayon::prelude::*;

use super::{upsample_step, Particle, ParticleEnsemble, SequentialModel, SmcError};
use crate::resampling::{multinomial_downsample, optimal_downsample, resample_sisr, ResampleScheme};
use crate::rng::{Domain, StreamKey};

/// How the survivors of one step were chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StepAction {
    /// At least `N` positive candidates: threshold downsampling to `N`
    /// distinct paths.
    Optimal,
    /// Fewer than `N` positive candidates: multinomial with replacement.
    WithReplacement,
    /// SISR initialization: weights only, no resampling.
    Weighted,
    Resampled(ResampleScheme),
}

#[derive(Debug, Clone)]
pub struct StepRecord {
    pub step: usize,
    pub candidates: usize,
    pub positive_count: usize,
    pub action: StepAction,
    pub threshold: Option<f64>,
    pub kept: usize,
    pub elapsed: Duration,
}

// Wall time is excluded: two runs with the same seed compare equal.
impl PartialEq for StepRecord {
    fn eq(&self, other: &Self) -> bool {
        self.step == other.step
            && self.candidates == other.candidates
            && self.positive_count == other.positive_count
            && self.action == other.action
            && self.threshold.map(f64::to_bits) == other.threshold.map(f64::to_bits)
            && self.kept == other.kept
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct RunDiagnostics {
    pub steps: Vec<StepRecord>,
}

impl RunDiagnostics {
    pub fn total_time(&self) -> Duration {
        self.steps.iter().map(|s| s.elapsed).sum()
    }

    pub fn with_replacement_steps(&self) -> usize {
        self.steps.iter().filter(|s| s.action == StepAction::WithReplacement).count()
    }
}

/// Final ensemble (at step `T`) and per-step records.
#[derive(Debug, Clone, PartialEq)]
pub struct SmcRun<S> {
    pub ensemble: ParticleEnsemble<S>,
    pub diagnostics: RunDiagnostics,
}

fn check_sizes(n: usize, m: usize) -> Result<(), SmcError> {
    if n == 0 || m == 0 {
        return Err(SmcError::InvalidArgument(format!("need N >= 1 and M >= 1, got N = {n}, M = {m}")));
    }
    Ok(())
}

/// Upsampling-downsampling SMC: `M·N` proposals per step, then `N` survivors.
///
/// Step 0 upsamples `M·N` draws from `η(x_0)` (the root ensemble of `N`
/// empty paths, `M` children each); every step, including step 0, is
/// followed by optimal downsampling, or by multinomial resampling when
/// fewer than `N` candidates have positive weight.
pub fn run_updown_smc<M: SequentialModel>(
    model: &M,
    n: usize,
    m: usize,
    seed: u64,
) -> Result<SmcRun<M::State>, SmcError> {
    check_sizes(n, m)?;
    let key = StreamKey::new(seed);
    let mut ensemble = ParticleEnsemble::root(n);
    let mut diagnostics = RunDiagnostics::default();

    for step in 0..=model.horizon() {
        let started = Instant::now();
        let upsampled = upsample_step(&ensemble, model, m, key);
        let positive = upsampled.positive_count();
        if positive == 0 {
            return Err(SmcError::AllParticlesDead { step, diagnostics });
        }
        let log_weights = upsampled.log_weights();
        let mut rng = key.rng(Domain::Downsample, step as u64, 0, 0);
        let (outcome, action) = if positive >= n {
            (optimal_downsample(&log_weights, n, &mut rng)?, StepAction::Optimal)
        } else {
            (multinomial_downsample(&log_weights, n, &mut rng)?, StepAction::WithReplacement)
        };
        let next = upsampled.select(&outcome.selected, &outcome.log_weights);
        diagnostics.steps.push(StepRecord {
            step,
            candidates: upsampled.len(),
            positive_count: positive,
            action,
            threshold: outcome.threshold.map(|t| t.c),
            kept: outcome.threshold.map_or(0, |t| t.kept),
            elapsed: started.elapsed(),
        });
        ensemble = next;
    }
    Ok(SmcRun { ensemble, diagnostics })
}

/// Sequential importance sampling with resampling: one child per particle,
/// weight update, then resampling with `scheme` at every step after the
/// initial one.
pub fn run_sisr<M: SequentialModel>(
    model: &M,
    n: usize,
    scheme: ResampleScheme,
    seed: u64,
) -> Result<SmcRun<M::State>, SmcError> {
    check_sizes(n, 1)?;
    let key = StreamKey::new(seed);
    let mut diagnostics = RunDiagnostics::default();

    let started = Instant::now();
    let root = ParticleEnsemble::root(n);
    let upsampled = upsample_step(&root, model, 1, key);
    let positive = upsampled.positive_count();
    if positive == 0 {
        return Err(SmcError::AllParticlesDead { step: 0, diagnostics });
    }
    let candidates = upsampled.len();
    let mut ensemble = upsampled.into_ensemble();
    ensemble.normalize();
    diagnostics.steps.push(StepRecord {
        step: 0,
        candidates,
        positive_count: positive,
        action: StepAction::Weighted,
        threshold: None,
        kept: 0,
        elapsed: started.elapsed(),
    });

    let uniform = vec![-(n as f64).ln(); n];
    for step in 1..=model.horizon() {
        let started = Instant::now();
        let upsampled = upsample_step(&ensemble, model, 1, key);
        let positive = upsampled.positive_count();
        if positive == 0 {
            return Err(SmcError::AllParticlesDead { step, diagnostics });
        }
        let mut rng = key.rng(Domain::Resample, step as u64, 0, 0);
        let selected = resample_sisr(&upsampled.log_weights(), n, scheme, &mut rng)?;
        let next = upsampled.select(&selected, &uniform);
        diagnostics.steps.push(StepRecord {
            step,
            candidates: upsampled.len(),
            positive_count: positive,
            action: StepAction::Resampled(scheme),
            threshold: None,
            kept: 0,
            elapsed: started.elapsed(),
        });
        ensemble = next;
    }
    Ok(SmcRun { ensemble, diagnostics })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ImportanceStatus {
    Complete,
    BudgetExhausted,
}

/// Positive-weight full paths drawn from `η`, with rejection accounting.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedSampleSet<S> {
    /// Only the positive-weight samples; `origin` is the draw index.
    pub samples: Vec<Particle<S>>,
    pub draws: usize,
    pub status: ImportanceStatus,
}

impl<S> WeightedSampleSet<S> {
    pub fn positive(&self) -> usize {
        self.samples.len()
    }

    pub fn acceptance_rate(&self) -> f64 {
        if self.draws == 0 {
            0.0
        } else {
            self.samples.len() as f64 / self.draws as f64
        }
    }

    /// Turns an exhausted budget into [`SmcError::BudgetExhausted`].
    pub fn require_complete(self) -> Result<Self, SmcError> {
        match self.status {
            ImportanceStatus::Complete => Ok(self),
            ImportanceStatus::BudgetExhausted => {
                Err(SmcError::BudgetExhausted { draws: self.draws, positive: self.samples.len() })
            }
        }
    }
}

const IS_BATCH: usize = 4096;

/// Draw whole paths from `η` until `n_target` have positive weight or
/// `max_draws` paths have been drawn.
///
/// Draw `d` uses the streams `(d, t)`, so batching and threading do not
/// change which draws are accepted. A path stops being extended once its
/// weight is zero; it still counts as a draw.
pub fn run_importance_sampling<M: SequentialModel>(
    model: &M,
    n_target: usize,
    max_draws: usize,
    seed: u64,
) -> Result<WeightedSampleSet<M::State>, SmcError> {
    if n_target == 0 {
        return Err(SmcError::InvalidArgument("n_target must be at least 1".into()));
    }
    let key = StreamKey::new(seed);
    let horizon = model.horizon();
    let mut samples = Vec::with_capacity(n_target.min(max_draws));
    let mut draws = 0usize;

    while draws < max_draws && samples.len() < n_target {
        let batch = IS_BATCH.min(max_draws - draws);
        let drawn: Vec<Option<Particle<M::State>>> = (draws..draws + batch)
            .into_par_iter()
            .with_min_len(64)
            .map(|d| {
                let mut path = Vec::with_capacity(horizon + 1);
                let mut log_weight = 0.0;
                for t in 0..=horizon {
                    let mut rng = key.rng(Domain::Importance, d as u64, t as u64, 0);
                    let (x, inc) = model.extend(&path, &mut rng);
                    log_weight += inc;
                    if log_weight == f64::NEG_INFINITY {
                        return None;
                    }
                    path.push(x);
                }
                Some(Particle { path, log_weight, origin: d })
            })
            .collect();
        for sample in drawn {
            draws += 1;
            if let Some(p) = sample {
                samples.push(p);
                if samples.len() == n_target {
                    break;
                }
            }
        }
    }
    let status = if samples.len() == n_target { ImportanceStatus::Complete } else { ImportanceStatus::BudgetExhausted };
    Ok(WeightedSampleSet { samples, draws, status })
}
