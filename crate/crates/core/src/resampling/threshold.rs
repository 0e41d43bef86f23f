use super::ResampleError;

/// Solution of `Σ min(c·w_i, 1) = N`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThresholdSolution {
    pub c: f64,
    /// Number of weights with `c·w ≥ 1`, kept with certainty.
    pub kept: usize,
    /// Exactly `N` positive weights: every one of them survives.
    pub keep_all: bool,
}

impl ThresholdSolution {
    #[inline]
    pub fn inclusion(&self, w: f64) -> f64 {
        (self.c * w).min(1.0)
    }

    /// Ties at `w = 1/c` count as kept.
    #[inline]
    pub fn is_kept(&self, w: f64) -> bool {
        w > 0.0 && self.c * w >= 1.0
    }
}

/// Exact threshold for selecting `n` survivors out of `weights`.
///
/// The map `c ↦ Σ min(c·w_i, 1)` is piecewise linear with breakpoints at
/// `1/w_i`. With the weights sorted in decreasing order and the top `L`
/// capped, the solution on that segment is `c = (N - L) / Σ_{i>L} w_(i)`;
/// the first `L` whose `c` leaves `w_(L+1)` uncapped is the answer. Since
/// `L < N`, only the `N` largest weights can be breakpoints, so those are
/// selected and sorted and the remaining mass is summed once.
pub fn solve_threshold(weights: &[f64], n: usize) -> Result<ThresholdSolution, ResampleError> {
    if n == 0 {
        return Err(ResampleError::ZeroTarget);
    }
    for (index, &value) in weights.iter().enumerate() {
        if !(value.is_finite() && value >= 0.0) {
            return Err(ResampleError::InvalidWeight { index, value });
        }
    }
    let mut positive: Vec<f64> = weights.iter().copied().filter(|&w| w > 0.0).collect();
    if positive.len() < n {
        return Err(ResampleError::TooFewPositive { positive: positive.len(), required: n });
    }
    if positive.len() == n {
        let min = positive.iter().copied().fold(f64::INFINITY, f64::min);
        return Ok(ThresholdSolution { c: 1.0 / min, kept: n, keep_all: true });
    }

    let desc = |a: &f64, b: &f64| b.total_cmp(a);
    positive.select_nth_unstable_by(n - 1, desc);
    let (top, rest) = positive.split_at_mut(n);
    top.sort_unstable_by(desc);
    let rest_sum: f64 = rest.iter().sum();

    // suffix[l] = Σ_{i ≥ l} w_(i) over the full positive set.
    let mut suffix = vec![0.0; n];
    let mut acc = rest_sum;
    for l in (0..n).rev() {
        acc += top[l];
        suffix[l] = acc;
    }

    let mut c = f64::NAN;
    for l in 0..n {
        let candidate = (n - l) as f64 / suffix[l];
        if candidate * top[l] <= 1.0 {
            c = candidate;
            break;
        }
    }
    // l = n - 1 always qualifies: top[n-1] is one term of suffix[n-1].
    debug_assert!(c.is_finite());

    let kept = weights.iter().filter(|&&w| w > 0.0 && c * w >= 1.0).count();
    Ok(ThresholdSolution { c, kept, keep_all: false })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Independent route: bisection on the monotone map c ↦ Σ min(c·w, 1).
    fn bisect(weights: &[f64], n: usize) -> f64 {
        let g = |c: f64| weights.iter().map(|&w| (c * w).min(1.0)).sum::<f64>();
        let mut lo = 0.0;
        let mut hi = 1.0;
        while g(hi) < n as f64 {
            hi *= 2.0;
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if g(mid) < n as f64 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }

    fn identity_residual(weights: &[f64], sol: &ThresholdSolution, n: usize) -> f64 {
        (weights.iter().map(|&w| sol.inclusion(w)).sum::<f64>() - n as f64).abs()
    }

    #[test]
    fn three_weights_two_survivors() {
        let w = [0.5, 0.3, 0.2];
        // Bisection oracle: 2.0 (1 + 0.6 + 0.4 = 2).
        assert!((bisect(&w, 2) - 2.0).abs() < 1e-12);
        let sol = solve_threshold(&w, 2).unwrap();
        assert!((sol.c - 2.0).abs() < 1e-12);
        assert_eq!(sol.kept, 1);
        assert!(!sol.keep_all);
    }

    #[test]
    fn skewed_three_weights() {
        let w = [0.7, 0.2, 0.1];
        assert!((bisect(&w, 2) - 10.0 / 3.0).abs() < 1e-12);
        let sol = solve_threshold(&w, 2).unwrap();
        assert!((sol.c - 10.0 / 3.0).abs() < 1e-12);
        assert_eq!(sol.kept, 1);
        assert!(identity_residual(&w, &sol, 2) < 1e-12);
    }

    #[test]
    fn equal_weights() {
        let w = vec![0.01; 100];
        let sol = solve_threshold(&w, 10).unwrap();
        assert!((sol.c - 10.0).abs() < 1e-9);
        assert_eq!(sol.kept, 0);
        for &x in &w {
            assert!((sol.inclusion(x) - 0.1).abs() < 1e-12);
        }
    }

    #[test]
    fn keep_all_when_exactly_n_positive() {
        let w = [0.0, 0.25, 0.0, 0.75];
        let sol = solve_threshold(&w, 2).unwrap();
        assert!(sol.keep_all);
        assert_eq!(sol.kept, 2);
        assert!((sol.c - 4.0).abs() < 1e-12);
    }

    #[test]
    fn too_few_positive() {
        assert_eq!(
            solve_threshold(&[0.0, 1.0, 0.0], 2),
            Err(ResampleError::TooFewPositive { positive: 1, required: 2 })
        );
        assert!(matches!(solve_threshold(&[f64::NAN, 1.0], 1), Err(ResampleError::InvalidWeight { index: 0, .. })));
    }

    #[test]
    fn ties_at_threshold_are_kept() {
        // c = 4 (1 + 6·0.5 = 4): 0.25 sits exactly on 1/c.
        let w = [0.25, 0.125, 0.125, 0.125, 0.125, 0.125, 0.125];
        let sol = solve_threshold(&w, 4).unwrap();
        assert_eq!(sol.c, 4.0);
        assert_eq!(sol.kept, 1);
    }

    proptest! {
        #[test]
        fn identity_and_oracle(
            raw in prop::collection::vec(prop_oneof![Just(0.0), 1e-6f64..1.0, 1.0f64..1e3], 2..300),
            frac in 0.01f64..1.0,
        ) {
            let positive = raw.iter().filter(|&&w| w > 0.0).count();
            prop_assume!(positive >= 1);
            let n = ((positive as f64 * frac).ceil() as usize).clamp(1, positive);
            let total: f64 = raw.iter().sum();
            let w: Vec<f64> = raw.iter().map(|x| x / total).collect();
            let sol = solve_threshold(&w, n).unwrap();
            prop_assert!(identity_residual(&w, &sol, n) <= 1e-9 * n as f64);
            prop_assert!(sol.kept <= n);
            if !sol.keep_all {
                let oracle = bisect(&w, n);
                prop_assert!((sol.c - oracle).abs() <= 1e-9 * oracle);
            }
        }
    }
}
