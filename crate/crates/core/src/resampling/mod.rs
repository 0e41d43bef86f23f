//! Downsampling and classical resampling.
//!
//! All entry points take *log* weights; `-inf` marks a zero-weight candidate,
//! which is never selected by any scheme.

mod downsample;
mod schemes;
mod threshold;

pub use downsample::{multinomial_downsample, optimal_downsample, DownsampleOutcome};
pub use schemes::{resample_sisr, ResampleScheme};
pub use threshold::{solve_threshold, ThresholdSolution};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ResampleError {
    #[error("only {positive} positive weights, need at least {required}")]
    TooFewPositive { positive: usize, required: usize },
    #[error("all weights are zero")]
    NoMass,
    #[error("weight {index} is not a finite nonnegative number: {value}")]
    InvalidWeight { index: usize, value: f64 },
    #[error("requested zero survivors")]
    ZeroTarget,
}
