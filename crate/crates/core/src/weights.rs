//! Log-space weight helpers shared by the engine and the resamplers.

/// `ln Σ exp(x_i)`, or `-inf` when every entry is `-inf` (or the slice is empty).
pub fn log_sum_exp(log_weights: &[f64]) -> f64 {
    let max = log_weights.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    let sum: f64 = log_weights.iter().map(|&lw| (lw - max).exp()).sum();
    max + sum.ln()
}

/// Weights rescaled so the largest is exactly 1, together with their sum.
///
/// Returns `None` when there is no positive weight.
pub fn scaled(log_weights: &[f64]) -> Option<(Vec<f64>, f64)> {
    let max = log_weights.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return None;
    }
    let scaled: Vec<f64> = log_weights.iter().map(|&lw| (lw - max).exp()).collect();
    let sum = scaled.iter().sum();
    Some((scaled, sum))
}

/// Linear weights summing to one. `None` when there is no positive weight.
pub fn normalized(log_weights: &[f64]) -> Option<Vec<f64>> {
    scaled(log_weights).map(|(mut w, sum)| {
        w.iter_mut().for_each(|x| *x /= sum);
        w
    })
}

pub fn count_positive(log_weights: &[f64]) -> usize {
    log_weights.iter().filter(|&&lw| lw > f64::NEG_INFINITY).count()
}
