//! Finite-state hidden Markov model, small enough to enumerate.

use rand::Rng;

use crate::rng::StreamRng;
use crate::smc::{SequentialModel, SmcError, Statistic};

/// Largest path space [`enumerate_exact`] will walk.
pub const ENUMERATION_BOUND: f64 = 1e7;

/// Target `p_T(x) ∝ μ(x_0) e(x_0, y_0) Π A(x_{t-1}, x_t) e(x_t, y_t)`, with
/// `p_t` the same product truncated at `t`. Proposals come from a separate
/// initial distribution and transition matrix (the prior by default).
#[derive(Debug, Clone, PartialEq)]
pub struct ToyHmm {
    initial: Vec<f64>,
    transition: Vec<Vec<f64>>,
    emission: Vec<Vec<f64>>,
    observations: Vec<usize>,
    proposal_initial: Vec<f64>,
    proposal_transition: Vec<Vec<f64>>,
}

fn check_distribution(name: &str, row: &[f64], len: usize) -> Result<(), SmcError> {
    if row.len() != len {
        return Err(SmcError::InvalidArgument(format!("{name}: expected {len} entries, got {}", row.len())));
    }
    if row.iter().any(|&p| !(p.is_finite() && p >= 0.0)) {
        return Err(SmcError::InvalidArgument(format!("{name}: entries must be finite and nonnegative")));
    }
    let sum: f64 = row.iter().sum();
    if (sum - 1.0).abs() > 1e-9 {
        return Err(SmcError::InvalidArgument(format!("{name}: sums to {sum}, not 1")));
    }
    Ok(())
}

fn check_support(name: &str, target: &[f64], proposal: &[f64]) -> Result<(), SmcError> {
    if target.iter().zip(proposal).any(|(&p, &q)| p > 0.0 && q == 0.0) {
        return Err(SmcError::InvalidArgument(format!("{name}: proposal misses target support")));
    }
    Ok(())
}

fn sample_categorical(probs: &[f64], rng: &mut StreamRng) -> usize {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    for (i, &p) in probs.iter().enumerate() {
        acc += p;
        if u < acc {
            return i;
        }
    }
    probs.iter().rposition(|&p| p > 0.0).unwrap_or(0)
}

impl ToyHmm {
    /// Bootstrap proposal (`η` = prior). `emission[x][y]` is `P(y | x)`.
    pub fn new(
        initial: Vec<f64>,
        transition: Vec<Vec<f64>>,
        emission: Vec<Vec<f64>>,
        observations: Vec<usize>,
    ) -> Result<Self, SmcError> {
        let k = initial.len();
        if k == 0 || observations.is_empty() {
            return Err(SmcError::InvalidArgument("need at least one state and one observation".into()));
        }
        check_distribution("initial", &initial, k)?;
        if transition.len() != k || emission.len() != k {
            return Err(SmcError::InvalidArgument("transition and emission need one row per state".into()));
        }
        for row in &transition {
            check_distribution("transition row", row, k)?;
        }
        let n_obs = emission[0].len();
        for row in &emission {
            check_distribution("emission row", row, n_obs)?;
        }
        if observations.iter().any(|&y| y >= n_obs) {
            return Err(SmcError::InvalidArgument("observation symbol out of range".into()));
        }
        Ok(Self {
            proposal_initial: initial.clone(),
            proposal_transition: transition.clone(),
            initial,
            transition,
            emission,
            observations,
        })
    }

    pub fn with_proposal(mut self, initial: Vec<f64>, transition: Vec<Vec<f64>>) -> Result<Self, SmcError> {
        let k = self.n_states();
        check_distribution("proposal initial", &initial, k)?;
        check_support("proposal initial", &self.initial, &initial)?;
        if transition.len() != k {
            return Err(SmcError::InvalidArgument("proposal transition needs one row per state".into()));
        }
        for (row, target) in transition.iter().zip(&self.transition) {
            check_distribution("proposal transition row", row, k)?;
            check_support("proposal transition row", target, row)?;
        }
        self.proposal_initial = initial;
        self.proposal_transition = transition;
        Ok(self)
    }

    /// Three states, five observations, and a proposal that differs from
    /// the prior so weights are uneven.
    pub fn three_state_demo() -> Self {
        ToyHmm::new(
            vec![0.5, 0.3, 0.2],
            vec![vec![0.7, 0.2, 0.1], vec![0.15, 0.7, 0.15], vec![0.1, 0.3, 0.6]],
            vec![vec![0.8, 0.2], vec![0.4, 0.6], vec![0.1, 0.9]],
            vec![0, 1, 1, 0, 1],
        )
        .and_then(|m| {
            m.with_proposal(
                vec![1.0 / 3.0; 3],
                vec![vec![0.5, 0.25, 0.25], vec![0.25, 0.5, 0.25], vec![0.25, 0.25, 0.5]],
            )
        })
        .expect("demo tables are valid")
    }

    pub fn n_states(&self) -> usize {
        self.initial.len()
    }

    /// Unnormalized `ln p_T(path)` from the target tables alone.
    pub fn log_target(&self, path: &[usize]) -> f64 {
        let mut lp = (self.initial[path[0]] * self.emission[path[0]][self.observations[0]]).ln();
        for t in 1..path.len() {
            let (a, b) = (path[t - 1], path[t]);
            lp += (self.transition[a][b] * self.emission[b][self.observations[t]]).ln();
        }
        lp
    }
}

impl SequentialModel for ToyHmm {
    type State = usize;

    fn horizon(&self) -> usize {
        self.observations.len() - 1
    }

    fn initial_propose(&self, rng: &mut StreamRng) -> usize {
        sample_categorical(&self.proposal_initial, rng)
    }

    fn initial_log_increment(&self, x0: &usize) -> f64 {
        let p = self.initial[*x0] * self.emission[*x0][self.observations[0]];
        (p / self.proposal_initial[*x0]).ln()
    }

    fn propose(&self, prefix: &[usize], rng: &mut StreamRng) -> usize {
        let prev = *prefix.last().expect("non-empty prefix");
        sample_categorical(&self.proposal_transition[prev], rng)
    }

    fn log_increment(&self, prefix: &[usize], x: &usize) -> f64 {
        let t = prefix.len();
        let prev = prefix[t - 1];
        let p = self.transition[prev][*x] * self.emission[*x][self.observations[t]];
        (p / self.proposal_transition[prev][*x]).ln()
    }
}

/// Exact `E_{p_T}[f]` by summing over all `|X|^(T+1)` paths.
///
/// Uses only the target tables, never the proposal or the weight
/// increments, so it is independent of the sampler under test.
pub fn enumerate_exact<T>(model: &ToyHmm, stat: &T) -> Result<Vec<f64>, SmcError>
where
    T: Statistic<usize> + ?Sized,
{
    let k = model.n_states();
    let len = model.horizon() + 1;
    let paths = (k as f64).powi(len as i32);
    if paths > ENUMERATION_BOUND {
        return Err(SmcError::TooLarge { paths, bound: ENUMERATION_BOUND });
    }
    let mut path = vec![0usize; len];
    let mut total = 0.0;
    let mut acc: Vec<f64> = Vec::new();
    for code in 0..paths as usize {
        let mut c = code;
        for slot in path.iter_mut().rev() {
            *slot = c % k;
            c /= k;
        }
        let w = model.log_target(&path).exp();
        if w == 0.0 {
            continue;
        }
        let f = stat.eval(&path);
        if acc.is_empty() {
            acc = vec![0.0; f.len()];
        }
        for (a, v) in acc.iter_mut().zip(f) {
            *a += w * v;
        }
        total += w;
    }
    if total == 0.0 {
        return Err(SmcError::NoMass);
    }
    Ok(acc.into_iter().map(|a| a / total).collect())
}

/// Path functionals used as estimands on the toy HMM.
#[derive(Debug, Clone, PartialEq)]
pub enum HmmStatistic {
    /// `1{x_t = s}`.
    Indicator { t: usize, state: usize },
    /// `Σ_t x_t`.
    PathSum,
    /// The state at `t`, as a number.
    StateAt(usize),
}

impl HmmStatistic {
    pub fn label(&self) -> String {
        match self {
            HmmStatistic::Indicator { t, state } => format!("1[x{t}={state}]"),
            HmmStatistic::PathSum => "path_sum".into(),
            HmmStatistic::StateAt(t) => format!("x{t}"),
        }
    }
}

/// A [`HmmStatistic`] with its label cached for [`Statistic::name`].
pub struct NamedHmmStatistic {
    kind: HmmStatistic,
    name: String,
}

impl From<HmmStatistic> for NamedHmmStatistic {
    fn from(kind: HmmStatistic) -> Self {
        let name = kind.label();
        Self { kind, name }
    }
}

impl Statistic<usize> for NamedHmmStatistic {
    fn name(&self) -> &str {
        &self.name
    }

    fn eval(&self, path: &[usize]) -> Vec<f64> {
        vec![match self.kind {
            HmmStatistic::Indicator { t, state } => (path[t] == state) as u8 as f64,
            HmmStatistic::PathSum => path.iter().sum::<usize>() as f64,
            HmmStatistic::StateAt(t) => path[t] as f64,
        }]
    }
}

impl HmmStatistic {
    pub fn named(self) -> NamedHmmStatistic {
        self.into()
    }
}
