use super::{Particle, SmcError};

/// A function `f(x_{0:T})` whose target expectation is estimated.
pub trait Statistic<S>: Sync {
    fn name(&self) -> &str;

    fn eval(&self, path: &[S]) -> Vec<f64>;
}

/// A [`Statistic`] from a closure.
pub struct FnStatistic<F> {
    name: String,
    f: F,
}

impl<F> FnStatistic<F> {
    pub fn new(name: impl Into<String>, f: F) -> Self {
        Self { name: name.into(), f }
    }
}

impl<S, F> Statistic<S> for FnStatistic<F>
where
    F: Fn(&[S]) -> Vec<f64> + Sync,
{
    fn name(&self) -> &str {
        &self.name
    }

    fn eval(&self, path: &[S]) -> Vec<f64> {
        (self.f)(path)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EstimateReport {
    pub statistic: String,
    /// `Σ f(x_n) w_n / Σ w_n`.
    pub point: Vec<f64>,
    pub n_particles: usize,
    pub n_distinct: usize,
    /// Shannon entropy of the normalized weights (nats).
    pub weight_entropy: f64,
    /// Kish effective sample size `1 / Σ w_n²`.
    pub ess: f64,
}

/// Self-normalized weighted average of `stat` over `particles`.
///
/// Weights are rescaled by their maximum before exponentiation, so the
/// result does not depend on the overall weight scale and does not
/// underflow. Zero-weight particles are never evaluated.
pub fn estimate<S, T>(particles: &[Particle<S>], stat: &T) -> Result<EstimateReport, SmcError>
where
    T: Statistic<S> + ?Sized,
{
    let max = particles.iter().map(|p| p.log_weight).fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return Err(SmcError::NoMass);
    }
    let mut total = 0.0;
    let mut acc: Vec<f64> = Vec::new();
    let mut scaled = Vec::with_capacity(particles.len());
    for p in particles {
        let w = (p.log_weight - max).exp();
        scaled.push(w);
        if w == 0.0 {
            continue;
        }
        let f = stat.eval(&p.path);
        if acc.is_empty() {
            acc = vec![0.0; f.len()];
        }
        assert_eq!(f.len(), acc.len(), "statistic `{}` changed dimension", stat.name());
        for (a, v) in acc.iter_mut().zip(&f) {
            *a += w * v;
        }
        total += w;
    }
    let point = acc.into_iter().map(|a| a / total).collect();

    let mut entropy = 0.0;
    let mut sum_sq = 0.0;
    for w in scaled {
        let p = w / total;
        if p > 0.0 {
            entropy -= p * p.ln();
            sum_sq += p * p;
        }
    }
    let mut origins: Vec<usize> = particles.iter().map(|p| p.origin).collect();
    origins.sort_unstable();
    origins.dedup();

    Ok(EstimateReport {
        statistic: stat.name().to_string(),
        point,
        n_particles: particles.len(),
        n_distinct: origins.len(),
        weight_entropy: entropy,
        ess: 1.0 / sum_sq,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn particle(x: f64, w: f64, origin: usize) -> Particle<f64> {
        Particle { path: vec![x], log_weight: w.ln(), origin }
    }

    fn last() -> FnStatistic<impl Fn(&[f64]) -> Vec<f64> + Sync> {
        FnStatistic::new("last", |p: &[f64]| vec![*p.last().unwrap()])
    }

    #[test]
    fn single_particle() {
        let r = estimate(&[particle(7.3, 1.0, 0)], &last()).unwrap();
        assert_eq!(r.point, vec![7.3]);
        assert_eq!(r.n_distinct, 1);
        assert_eq!(r.weight_entropy, 0.0);
    }

    #[test]
    fn two_particles() {
        let r = estimate(&[particle(0.0, 0.25, 0), particle(1.0, 0.75, 1)], &last()).unwrap();
        assert!((r.point[0] - 0.75).abs() < 1e-15);
        assert!((r.ess - 1.0 / (0.0625 + 0.5625)).abs() < 1e-12);
    }

    #[test]
    fn duplicates_and_zero_mass() {
        let ps = [particle(1.0, 0.5, 3), particle(1.0, 0.5, 3), particle(2.0, 0.0, 4)];
        let r = estimate(&ps, &last()).unwrap();
        assert_eq!(r.n_distinct, 2);
        assert_eq!(r.point, vec![1.0]);
        let dead = [particle(1.0, 0.0, 0)];
        assert_eq!(estimate(&dead, &last()), Err(SmcError::NoMass));
        assert_eq!(estimate::<f64, _>(&[], &last()), Err(SmcError::NoMass));
    }

    proptest! {
        #[test]
        fn scale_invariant(
            xs in prop::collection::vec((-10.0f64..10.0, -30.0f64..0.0), 1..40),
            shift in -700.0f64..700.0,
        ) {
            let base: Vec<Particle<f64>> = xs.iter().enumerate()
                .map(|(i, &(x, lw))| Particle { path: vec![x], log_weight: lw, origin: i }).collect();
            let shifted: Vec<Particle<f64>> = base.iter()
                .map(|p| Particle { log_weight: p.log_weight + shift, ..p.clone() }).collect();
            let a = estimate(&base, &last()).unwrap().point[0];
            let b = estimate(&shifted, &last()).unwrap().point[0];
            prop_assert!((a - b).abs() <= 1e-12 * (1.0 + a.abs()));
        }
    }
}
