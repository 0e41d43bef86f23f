//! Sequential Monte Carlo with upsampling and optimal downsampling, and its
//! application to sampling protein backbone segments from a Boltzmann
//! distribution.
//!
//! * [`smc`]: the generic engine, baselines, and the weighted estimator.
//! * [`resampling`]: threshold solver, optimal and multinomial downsampling,
//!   classical SISR resamplers.
//! * [`protein`]: the backbone segment model.
//! * [`tables`]: loaders for potential, dihedral, closure and PDB files, and
//!   a synthetic table generator.
//! * [`statistics`]: structural quantities estimated on sampled segments.
//! * [`models`]: toy models with exact answers.

pub mod models;
pub mod protein;
pub mod resampling;
pub mod rng;
pub mod smc;
pub mod statistics;
pub mod tables;
pub mod weights;

pub use smc::{
    estimate, run_importance_sampling, run_sisr, run_updown_smc, EstimateReport, Particle, ParticleEnsemble,
    SequentialModel, SmcError, SmcRun, Statistic,
};
