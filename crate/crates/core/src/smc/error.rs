use thiserror::Error;

use super::RunDiagnostics;
use crate::resampling::ResampleError;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SmcError {
    #[error("no particle has positive weight after step {step}")]
    AllParticlesDead { step: usize, diagnostics: RunDiagnostics },
    #[error("all weights are zero")]
    NoMass,
    #[error("path space of {paths} paths exceeds the enumeration bound {bound}")]
    TooLarge { paths: f64, bound: f64 },
    #[error("draw budget of {draws} exhausted with {positive} positive-weight samples")]
    BudgetExhausted { draws: usize, positive: usize },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error(transparent)]
    Resample(#[from] ResampleError),
}

impl SmcError {
    /// Step at which the run died, if that is what happened.
    pub fn death_step(&self) -> Option<usize> {
        match self {
            SmcError::AllParticlesDead { step, .. } => Some(*step),
            _ => None,
        }
    }
}
