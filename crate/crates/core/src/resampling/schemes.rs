use std::fmt;
use std::str::FromStr;

use rand::Rng;

use super::downsample::multinomial_indices;
use super::ResampleError;
use crate::weights;

/// Classical with-replacement resampling schemes for the SISR baseline.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ResampleScheme {
    Multinomial,
    Stratified,
    Residual,
}

impl ResampleScheme {
    pub const ALL: [ResampleScheme; 3] = [Self::Multinomial, Self::Stratified, Self::Residual];

    pub fn as_str(&self) -> &'static str {
        match self {
            Self::Multinomial => "multinomial",
            Self::Stratified => "stratified",
            Self::Residual => "residual",
        }
    }
}

impl fmt::Display for ResampleScheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ResampleScheme {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "multinomial" => Ok(Self::Multinomial),
            "stratified" => Ok(Self::Stratified),
            "residual" => Ok(Self::Residual),
            other => Err(format!("unknown resampling scheme `{other}`")),
        }
    }
}

/// `n` ancestor indices; the resampled particles all carry weight `1/n`.
pub fn resample_sisr<R: Rng + ?Sized>(
    log_weights: &[f64],
    n: usize,
    scheme: ResampleScheme,
    rng: &mut R,
) -> Result<Vec<usize>, ResampleError> {
    if n == 0 {
        return Err(ResampleError::ZeroTarget);
    }
    // Scaled so the largest weight is exactly 1; equal log weights give
    // exactly equal scaled weights and an integer total.
    let (scaled, total) = weights::scaled(log_weights).ok_or(ResampleError::NoMass)?;
    let mut idx = match scheme {
        ResampleScheme::Multinomial => multinomial_indices(&scaled, total, n, rng),
        ResampleScheme::Stratified => stratified(&scaled, total, n, rng),
        ResampleScheme::Residual => residual(&scaled, total, n, rng),
    };
    idx.sort_unstable();
    Ok(idx)
}

fn stratified<R: Rng + ?Sized>(scaled: &[f64], total: f64, n: usize, rng: &mut R) -> Vec<usize> {
    let step = total / n as f64;
    let last_positive = scaled.iter().rposition(|&s| s > 0.0).expect("positive mass");
    let mut out = Vec::with_capacity(n);
    let mut i = 0;
    let mut cum = scaled[0];
    for j in 0..n {
        let u = (j as f64 + rng.random::<f64>()) * step;
        while cum <= u && i < last_positive {
            i += 1;
            cum += scaled[i];
        }
        out.push(i);
    }
    out
}

fn residual<R: Rng + ?Sized>(scaled: &[f64], total: f64, n: usize, rng: &mut R) -> Vec<usize> {
    let mut out = Vec::with_capacity(n);
    let mut remainder = Vec::with_capacity(scaled.len());
    for (i, &s) in scaled.iter().enumerate() {
        let expected = n as f64 * s / total;
        let copies = expected.floor();
        out.extend(std::iter::repeat_n(i, copies as usize));
        remainder.push(expected - copies);
    }
    out.truncate(n);
    let left = n - out.len();
    if left > 0 {
        let rem_total: f64 = remainder.iter().sum();
        if rem_total > 0.0 {
            out.extend(multinomial_indices(&remainder, rem_total, left, rng));
        } else {
            out.extend(multinomial_indices(scaled, total, left, rng));
        }
    }
    out
}
