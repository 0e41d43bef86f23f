use rand::Rng;

use super::{solve_threshold, ResampleError, ThresholdSolution};
use crate::weights;

/// Result of choosing `N` survivors out of a candidate set.
#[derive(Debug, Clone, PartialEq)]
pub struct DownsampleOutcome {
    /// Candidate indices of the survivors, ascending. Duplicates only occur
    /// for with-replacement schemes.
    pub selected: Vec<usize>,
    /// Post-downsample log weight of each survivor; these sum to one in
    /// linear space.
    pub log_weights: Vec<f64>,
    /// Per-candidate probability of appearing among the survivors.
    pub inclusion_probs: Vec<f64>,
    pub threshold: Option<ThresholdSolution>,
}

impl DownsampleOutcome {
    pub fn len(&self) -> usize {
        self.selected.len()
    }

    pub fn is_empty(&self) -> bool {
        self.selected.is_empty()
    }
}

/// Minimum-variance downsampling to `n` distinct survivors.
///
/// Candidates with `w ≥ 1/c` are kept with their weight unchanged. The other
/// `n - L` survivors come from one systematic pass over the scaled weights
/// `c·w_i` in candidate order: a single uniform `u` and the points
/// `u, u + 1, …`. Each scaled weight is below one, so no interval receives
/// two points and candidate `i` is included with probability exactly `c·w_i`.
/// Those survivors carry weight `1/c`.
pub fn optimal_downsample<R: Rng + ?Sized>(
    log_weights: &[f64],
    n: usize,
    rng: &mut R,
) -> Result<DownsampleOutcome, ResampleError> {
    if n == 0 {
        return Err(ResampleError::ZeroTarget);
    }
    let lse = weights::log_sum_exp(log_weights);
    if lse == f64::NEG_INFINITY {
        return Err(ResampleError::NoMass);
    }
    let w: Vec<f64> = log_weights.iter().map(|&lw| (lw - lse).exp()).collect();
    let sol = solve_threshold(&w, n)?;

    if sol.keep_all {
        let selected: Vec<usize> = (0..w.len()).filter(|&i| w[i] > 0.0).collect();
        let log_weights = selected.iter().map(|&i| log_weights[i] - lse).collect();
        let inclusion_probs = w.iter().map(|&x| if x > 0.0 { 1.0 } else { 0.0 }).collect();
        return Ok(DownsampleOutcome { selected, log_weights, inclusion_probs, threshold: Some(sol) });
    }

    let need = n - sol.kept;
    let mut chosen = vec![false; w.len()];
    let mut picked = 0usize;
    let u: f64 = rng.random();
    let mut point = u;
    let mut cum = 0.0;
    for (i, &wi) in w.iter().enumerate() {
        if wi <= 0.0 {
            continue;
        }
        if sol.is_kept(wi) {
            chosen[i] = true;
            continue;
        }
        cum += sol.c * wi;
        if picked < need && point < cum {
            chosen[i] = true;
            picked += 1;
            point += 1.0;
        }
    }
    // The scaled weights sum to n - L only up to rounding; if the last point
    // fell just past the end, take the trailing unselected candidates.
    if picked < need {
        for i in (0..w.len()).rev() {
            if picked == need {
                break;
            }
            if w[i] > 0.0 && !chosen[i] {
                chosen[i] = true;
                picked += 1;
            }
        }
    }

    let log_c = sol.c.ln();
    let mut selected = Vec::with_capacity(n);
    let mut new_log_weights = Vec::with_capacity(n);
    for (i, &is_chosen) in chosen.iter().enumerate() {
        if is_chosen {
            selected.push(i);
            new_log_weights.push(if sol.is_kept(w[i]) { log_weights[i] - lse } else { -log_c });
        }
    }
    debug_assert_eq!(selected.len(), n);
    let inclusion_probs = w.iter().map(|&x| sol.inclusion(x)).collect();
    Ok(DownsampleOutcome { selected, log_weights: new_log_weights, inclusion_probs, threshold: Some(sol) })
}

/// `n` i.i.d. draws proportional to the weights; every survivor gets `1/n`.
pub fn multinomial_downsample<R: Rng + ?Sized>(
    log_weights: &[f64],
    n: usize,
    rng: &mut R,
) -> Result<DownsampleOutcome, ResampleError> {
    if n == 0 {
        return Err(ResampleError::ZeroTarget);
    }
    let (scaled, total) = weights::scaled(log_weights).ok_or(ResampleError::NoMass)?;
    let mut selected = multinomial_indices(&scaled, total, n, rng);
    selected.sort_unstable();
    let inclusion_probs = scaled
        .iter()
        .map(|&s| {
            let p = s / total;
            -(n as f64 * (-p).ln_1p()).exp_m1()
        })
        .collect();
    Ok(DownsampleOutcome { selected, log_weights: vec![-(n as f64).ln(); n], inclusion_probs, threshold: None })
}

/// Inverse-CDF draws over unnormalized nonnegative weights.
pub(crate) fn multinomial_indices<R: Rng + ?Sized>(scaled: &[f64], total: f64, n: usize, rng: &mut R) -> Vec<usize> {
    let mut cdf = Vec::with_capacity(scaled.len());
    let mut acc = 0.0;
    for &s in scaled {
        acc += s;
        cdf.push(acc);
    }
    let last_positive = scaled.iter().rposition(|&s| s > 0.0).expect("positive mass");
    (0..n)
        .map(|_| {
            let x = rng.random::<f64>() * total;
            cdf.partition_point(|&c| c <= x).min(last_positive)
        })
        .collect()
}
