//! Generic sequential Monte Carlo engine.
//!
//! [`run_updown_smc`] is the upsampling-downsampling sampler; [`run_sisr`]
//! and [`run_importance_sampling`] are the baselines it is compared with.
//! All three are deterministic in their seed, whatever the rayon thread
//! count.

mod driver;
mod error;
mod estimate;
mod model;
mod particle;
mod upsample;

pub use driver::{
    run_importance_sampling, run_sisr, run_updown_smc, ImportanceStatus, RunDiagnostics, SmcRun, StepAction,
    StepRecord, WeightedSampleSet,
};
pub use error::SmcError;
pub use estimate::{estimate, EstimateReport, FnStatistic, Statistic};
pub use model::SequentialModel;
pub use particle::{Candidate, Particle, ParticleEnsemble, UpsampledSet};
pub use upsample::upsample_step;
