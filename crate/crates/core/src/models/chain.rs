//! Hard-constrained Gaussian chain.
//!
//! `x_0 ~ N(target, σ_0²)` and `x_t ~ N(x_{t-1}, (s·b_{t-1})²)`, where
//! `b_t = b_0·r^t` is a bound that shrinks geometrically. The target keeps a
//! path only while `|x_t - target| ≤ b_t` at every step; `b_T` plays the
//! role of the closure tolerance. Each step kills most proposals, so plain
//! importance sampling almost never produces a complete path.
//!
//! The smooth part of the density is a narrow spike of height `A` just
//! inside the lower edge of every window except the last. A spike is a
//! dead end: it sits many step deviations away from the next window, so its
//! children die. Resampling schemes that pile copies onto the heaviest
//! particles lose the whole population there.

use rand_distr::{Distribution, StandardNormal};

use crate::rng::StreamRng;
use crate::smc::{SequentialModel, Statistic};

#[derive(Debug, Clone, PartialEq)]
pub struct ConstrainedChain {
    pub horizon: usize,
    pub target: f64,
    /// Bound at step 0.
    pub bound: f64,
    /// Ratio `b_{t+1} / b_t`.
    pub shrink: f64,
    pub init_sd: f64,
    /// Step deviation as a fraction of the previous bound.
    pub step_scale: f64,
    /// Log-height of the decoy spike.
    pub decoy_depth: f64,
    /// Spike width, as a fraction of the current bound.
    pub decoy_width: f64,
    /// Distance of the spike centre inside the lower edge, as a fraction of
    /// the current bound.
    pub decoy_offset: f64,
}

impl Default for ConstrainedChain {
    fn default() -> Self {
        Self {
            horizon: 4,
            target: 0.0,
            bound: 1000.0,
            shrink: 0.07,
            init_sd: 500.0,
            step_scale: 0.1,
            decoy_depth: 10.0,
            decoy_width: 0.01,
            decoy_offset: 0.03,
        }
    }
}

impl ConstrainedChain {
    pub fn half_width(&self, t: usize) -> f64 {
        self.bound * self.shrink.powi(t as i32)
    }

    pub fn window(&self, t: usize) -> (f64, f64) {
        let h = self.half_width(t);
        (self.target - h, self.target + h)
    }

    /// Deviation of the step into `x_t`; `t = 0` gives the initial deviation.
    pub fn step_sd(&self, t: usize) -> f64 {
        if t == 0 {
            self.init_sd
        } else {
            self.step_scale * self.half_width(t - 1)
        }
    }

    /// Centre of the decoy spike at step `t`.
    pub fn decoy_center(&self, t: usize) -> f64 {
        self.target - self.half_width(t) * (1.0 - self.decoy_offset)
    }

    fn log_factor(&self, t: usize, x: f64) -> f64 {
        if (x - self.target).abs() > self.half_width(t) {
            return f64::NEG_INFINITY;
        }
        self.log_smooth(t, x)
    }

    fn log_smooth(&self, t: usize, x: f64) -> f64 {
        if self.decoy_depth == 0.0 || t >= self.horizon {
            return 0.0;
        }
        let z = (x - self.decoy_center(t)) / (self.decoy_width * self.half_width(t));
        self.decoy_depth * (-0.5 * z * z).exp()
    }

    /// Exact `(E[x_t], E[x_t²])` for every `t` under `p_T`, by forward-backward
    /// recursion with composite Simpson quadrature on each window.
    ///
    /// The integrand is smooth inside every window and zero outside, so with
    /// node spacing `scale / per_scale` the error decays like `h⁴`. The scale
    /// is the narrowest step deviation acting on the window, or the spike
    /// width on a panel around the spike.
    pub fn exact_moments(&self, per_scale: usize) -> Vec<(f64, f64)> {
        let steps = self.horizon + 1;
        let mut nodes = Vec::with_capacity(steps);
        let mut weights = Vec::with_capacity(steps);
        for t in 0..steps {
            let (lo, hi) = self.window(t);
            let mut scale = self.step_sd(t);
            if t < self.horizon {
                scale = scale.min(self.step_sd(t + 1));
            }
            let mut panels = vec![(lo, hi, scale)];
            if self.decoy_depth != 0.0 && t < self.horizon {
                let c = self.decoy_center(t);
                let w = self.decoy_width * self.half_width(t);
                let (a, b) = ((c - 12.0 * w).max(lo), (c + 12.0 * w).min(hi));
                if a < b {
                    panels = vec![(lo, a, scale), (a, b, w.min(scale)), (b, hi, scale)];
                    panels.retain(|p| p.1 > p.0);
                }
            }
            let (x, w) = simpson_panels(&panels, per_scale);
            nodes.push(x);
            weights.push(w);
        }
        let smooth = |t: usize, x: f64| self.log_smooth(t, x).exp();
        let normal = |x: f64, sd: f64| (-0.5 * (x / sd).powi(2)).exp() / (sd * (2.0 * std::f64::consts::PI).sqrt());
        let band = |xs: &[f64], x: f64, sd: f64| {
            xs.partition_point(|&y| y < x - 12.0 * sd)..xs.partition_point(|&y| y <= x + 12.0 * sd)
        };
        let normalize = |v: &mut Vec<f64>, w: &[f64]| {
            let z: f64 = v.iter().zip(w).map(|(a, b)| a * b).sum();
            v.iter_mut().for_each(|a| *a /= z);
        };

        let mut alpha: Vec<Vec<f64>> = Vec::with_capacity(steps);
        let mut a0: Vec<f64> = nodes[0].iter().map(|&x| normal(x - self.target, self.init_sd) * smooth(0, x)).collect();
        normalize(&mut a0, &weights[0]);
        alpha.push(a0);
        for t in 1..steps {
            let sd = self.step_sd(t);
            let prev = &alpha[t - 1];
            let mut at: Vec<f64> = nodes[t]
                .iter()
                .map(|&x| {
                    let r = band(&nodes[t - 1], x, sd);
                    let conv: f64 = nodes[t - 1][r.clone()]
                        .iter()
                        .zip(&weights[t - 1][r.clone()])
                        .zip(&prev[r])
                        .map(|((&y, &w), &a)| w * a * normal(x - y, sd))
                        .sum();
                    conv * smooth(t, x)
                })
                .collect();
            normalize(&mut at, &weights[t]);
            alpha.push(at);
        }

        let mut beta: Vec<Vec<f64>> = vec![Vec::new(); steps];
        beta[steps - 1] = vec![1.0; nodes[steps - 1].len()];
        for t in (0..steps - 1).rev() {
            let sd = self.step_sd(t + 1);
            let next = &beta[t + 1];
            let mut bt: Vec<f64> = nodes[t]
                .iter()
                .map(|&y| {
                    let r = band(&nodes[t + 1], y, sd);
                    nodes[t + 1][r.clone()]
                        .iter()
                        .zip(&weights[t + 1][r.clone()])
                        .zip(&next[r])
                        .map(|((&x, &w), &b)| w * b * normal(x - y, sd) * smooth(t + 1, x))
                        .sum()
                })
                .collect();
            normalize(&mut bt, &weights[t]);
            beta[t] = bt;
        }

        (0..steps)
            .map(|t| {
                let mut z = 0.0;
                let mut m1 = 0.0;
                let mut m2 = 0.0;
                for ((&x, &w), (&a, &b)) in nodes[t].iter().zip(&weights[t]).zip(alpha[t].iter().zip(&beta[t])) {
                    let p = w * a * b;
                    z += p;
                    m1 += p * x;
                    m2 += p * x * x;
                }
                (m1 / z, m2 / z)
            })
            .collect()
    }
}

/// Composite Simpson nodes and weights over adjacent `(lo, hi, scale)` panels.
fn simpson_panels(panels: &[(f64, f64, f64)], per_scale: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![panels[0].0];
    let mut weights = vec![0.0];
    for &(lo, hi, scale) in panels {
        let want = ((hi - lo) / scale * per_scale as f64).ceil() as usize;
        let intervals = (want.max(2) + 1) & !1;
        let h = (hi - lo) / intervals as f64;
        *weights.last_mut().unwrap() += h / 3.0;
        for i in 1..=intervals {
            nodes.push(lo + h * i as f64);
            let c = if i == intervals {
                1.0
            } else if i % 2 == 1 {
                4.0
            } else {
                2.0
            };
            weights.push(c * h / 3.0);
        }
    }
    (nodes, weights)
}

impl SequentialModel for ConstrainedChain {
    type State = f64;

    fn horizon(&self) -> usize {
        self.horizon
    }

    fn initial_propose(&self, rng: &mut StreamRng) -> f64 {
        let z: f64 = StandardNormal.sample(rng);
        self.target + self.init_sd * z
    }

    fn initial_log_increment(&self, x0: &f64) -> f64 {
        self.log_factor(0, *x0)
    }

    fn propose(&self, prefix: &[f64], rng: &mut StreamRng) -> f64 {
        let z: f64 = StandardNormal.sample(rng);
        prefix[prefix.len() - 1] + self.step_sd(prefix.len()) * z
    }

    fn log_increment(&self, prefix: &[f64], x: &f64) -> f64 {
        self.log_factor(prefix.len(), *x)
    }
}

/// Estimands on the chain.
#[derive(Debug, Clone, PartialEq)]
pub enum ChainStatistic {
    /// `x_t`.
    Position(usize),
    /// `x_t²`.
    Square(usize),
}

impl ChainStatistic {
    pub fn label(&self) -> String {
        match self {
            ChainStatistic::Position(t) => format!("x[{t}]"),
            ChainStatistic::Square(t) => format!("x2[{t}]"),
        }
    }

    /// `x[T]`, `x[T/2]` and `x2[T]`.
    pub fn defaults(model: &ConstrainedChain) -> Vec<ChainStatistic> {
        vec![
            ChainStatistic::Position(model.horizon),
            ChainStatistic::Position(model.horizon / 2),
            ChainStatistic::Square(model.horizon),
        ]
    }

    pub fn parse(s: &str) -> Option<ChainStatistic> {
        let (kind, rest) = s.split_once('[')?;
        let t: usize = rest.strip_suffix(']')?.parse().ok()?;
        match kind {
            "x" => Some(ChainStatistic::Position(t)),
            "x2" => Some(ChainStatistic::Square(t)),
            _ => None,
        }
    }

    /// Exact value from [`ConstrainedChain::exact_moments`] output.
    pub fn exact(&self, moments: &[(f64, f64)]) -> f64 {
        match self {
            ChainStatistic::Position(t) => moments[*t].0,
            ChainStatistic::Square(t) => moments[*t].1,
        }
    }

    pub fn named(self) -> NamedChainStatistic {
        let name = self.label();
        NamedChainStatistic { kind: self, name }
    }
}

pub struct NamedChainStatistic {
    kind: ChainStatistic,
    name: String,
}

impl NamedChainStatistic {
    pub fn kind(&self) -> &ChainStatistic {
        &self.kind
    }
}

impl Statistic<f64> for NamedChainStatistic {
    fn name(&self) -> &str {
        &self.name
    }

    fn eval(&self, path: &[f64]) -> Vec<f64> {
        vec![match self.kind {
            ChainStatistic::Position(t) => path[t],
            ChainStatistic::Square(t) => path[t] * path[t],
        }]
    }
}
