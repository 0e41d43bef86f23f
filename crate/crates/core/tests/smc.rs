use rand::Rng;
use updown_core::models::{enumerate_exact, ChainStatistic, ConstrainedChain, HmmStatistic, ToyHmm};
use updown_core::resampling::ResampleScheme;
use updown_core::rng::StreamRng;
use updown_core::smc::{ImportanceStatus, StepAction};
use updown_core::*;

/// Uniform proposals on [0, 1), constant increments, optional death at one step.
struct Flat {
    horizon: usize,
    kill_at: Option<usize>,
    /// Increments at this step are `-∞` whenever the state is below `cut`.
    cut: Option<(usize, f64)>,
}

impl Flat {
    fn new(horizon: usize) -> Self {
        Self { horizon, kill_at: None, cut: None }
    }

    fn factor(&self, t: usize, x: f64) -> f64 {
        if self.kill_at == Some(t) {
            return f64::NEG_INFINITY;
        }
        match self.cut {
            Some((s, c)) if s == t && x < c => f64::NEG_INFINITY,
            _ => 0.0,
        }
    }
}

impl SequentialModel for Flat {
    type State = f64;

    fn horizon(&self) -> usize {
        self.horizon
    }

    fn initial_propose(&self, rng: &mut StreamRng) -> f64 {
        rng.random()
    }

    fn initial_log_increment(&self, x0: &f64) -> f64 {
        self.factor(0, *x0)
    }

    fn propose(&self, _prefix: &[f64], rng: &mut StreamRng) -> f64 {
        rng.random()
    }

    fn log_increment(&self, prefix: &[f64], x: &f64) -> f64 {
        self.factor(prefix.len(), *x)
    }
}

fn mean_and_se(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

#[test]
fn updown_matches_enumeration_on_toy_hmm() {
    let model = ToyHmm::three_state_demo();
    let stats = [
        HmmStatistic::Indicator { t: 2, state: 1 }.named(),
        HmmStatistic::PathSum.named(),
        HmmStatistic::StateAt(4).named(),
    ];
    let reps = 200;
    for stat in &stats {
        let exact = enumerate_exact(&model, stat).unwrap()[0];
        let values: Vec<f64> = (0..reps)
            .map(|r| {
                let run = run_updown_smc(&model, 200, 5, r).unwrap();
                estimate(run.ensemble.particles(), stat).unwrap().point[0]
            })
            .collect();
        let (mean, se) = mean_and_se(&values);
        assert!((mean - exact).abs() <= 3.0 * se, "{}: {mean} vs {exact} (se {se})", stat.name());
    }
}

#[test]
fn sisr_and_importance_match_enumeration_on_toy_hmm() {
    let model = ToyHmm::three_state_demo();
    let stat = HmmStatistic::PathSum.named();
    let exact = enumerate_exact(&model, &stat).unwrap()[0];
    for scheme in ResampleScheme::ALL {
        let values: Vec<f64> = (0..200)
            .map(|r| {
                let run = run_sisr(&model, 1000, scheme, r).unwrap();
                estimate(run.ensemble.particles(), &stat).unwrap().point[0]
            })
            .collect();
        let (mean, se) = mean_and_se(&values);
        assert!((mean - exact).abs() <= 3.0 * se, "{scheme}: {mean} vs {exact}");
    }
    let values: Vec<f64> = (0..200)
        .map(|r| {
            let set = run_importance_sampling(&model, 1000, 1000, r).unwrap();
            estimate(&set.samples, &stat).unwrap().point[0]
        })
        .collect();
    let (mean, se) = mean_and_se(&values);
    assert!((mean - exact).abs() <= 3.0 * se, "IS: {mean} vs {exact}");
}

#[test]
fn m_equal_one_keeps_everything_when_nothing_dies() {
    let run = run_updown_smc(&Flat::new(3), 50, 1, 9).unwrap();
    assert_eq!(run.ensemble.len(), 50);
    assert_eq!(run.ensemble.n_distinct(), 50);
    for rec in &run.diagnostics.steps {
        assert_eq!(rec.action, StepAction::Optimal);
        assert_eq!(rec.kept, 50);
    }
}

#[test]
fn m_equal_one_resamples_with_replacement_after_deaths() {
    let model = Flat { horizon: 2, kill_at: None, cut: Some((1, 0.5)) };
    let run = run_updown_smc(&model, 100, 1, 3).unwrap();
    let actions: Vec<StepAction> = run.diagnostics.steps.iter().map(|r| r.action).collect();
    assert_eq!(actions, vec![StepAction::Optimal, StepAction::WithReplacement, StepAction::Optimal]);
    let rec = &run.diagnostics.steps[1];
    assert!(rec.positive_count < 100 && rec.threshold.is_none());
    assert_eq!(run.ensemble.len(), 100);
    assert!(run.ensemble.particles().iter().all(|p| p.path[1] >= 0.5));
}

#[test]
fn run_reports_the_step_where_everything_died() {
    let model = Flat { horizon: 3, kill_at: Some(1), cut: None };
    let err = run_updown_smc(&model, 20, 4, 1).unwrap_err();
    assert_eq!(err.death_step(), Some(1));
    match err {
        SmcError::AllParticlesDead { diagnostics, .. } => assert_eq!(diagnostics.steps.len(), 1),
        other => panic!("unexpected {other:?}"),
    }
    let err = run_sisr(&model, 20, ResampleScheme::Residual, 1).unwrap_err();
    assert_eq!(err.death_step(), Some(1));
}

#[test]
fn invalid_sizes_are_rejected() {
    assert!(matches!(run_updown_smc(&Flat::new(1), 0, 3, 0), Err(SmcError::InvalidArgument(_))));
    assert!(matches!(run_updown_smc(&Flat::new(1), 3, 0, 0), Err(SmcError::InvalidArgument(_))));
    assert!(matches!(run_importance_sampling(&Flat::new(1), 0, 10, 0), Err(SmcError::InvalidArgument(_))));
}

#[test]
fn stratified_sisr_keeps_every_particle_under_equal_weights() {
    let run = run_sisr(&Flat::new(4), 64, ResampleScheme::Stratified, 5).unwrap();
    assert_eq!(run.ensemble.n_distinct(), 64);
    let mut origins: Vec<usize> = run.ensemble.particles().iter().map(|p| p.origin).collect();
    origins.sort_unstable();
    origins.dedup();
    assert_eq!(origins.len(), 64);
}

#[test]
fn runs_do_not_depend_on_thread_count() {
    let model = ConstrainedChain::default();
    let run_in = |threads: usize| {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
        pool.install(|| {
            (
                run_updown_smc(&model, 300, 20, 11).unwrap(),
                run_sisr(&model, 2000, ResampleScheme::Residual, 11),
                run_importance_sampling(&model, 5, 50_000, 11).unwrap(),
            )
        })
    };
    let (a, b) = (run_in(1), run_in(4));
    assert_eq!(a.0, b.0);
    assert_eq!(a.1, b.1);
    assert_eq!(a.2, b.2);
    assert_eq!(run_updown_smc(&model, 300, 20, 11).unwrap(), a.0);
    assert_ne!(run_updown_smc(&model, 300, 20, 12).unwrap(), a.0);
}

#[test]
fn importance_sampling_accounts_for_rejections() {
    let set = run_importance_sampling(&Flat::new(3), 500, 10_000, 2).unwrap();
    assert_eq!(set.acceptance_rate(), 1.0);
    assert_eq!(set.status, ImportanceStatus::Complete);
    assert_eq!(set.draws, 500);

    let chain = ConstrainedChain::default();
    let set = run_importance_sampling(&chain, 1_000_000, 100_000, 2).unwrap();
    assert_eq!(set.status, ImportanceStatus::BudgetExhausted);
    assert_eq!(set.draws, 100_000);
    assert!(set.acceptance_rate() < 0.05, "{}", set.acceptance_rate());
    let err = set.require_complete().unwrap_err();
    assert!(matches!(err, SmcError::BudgetExhausted { draws: 100_000, .. }));
}

#[test]
fn sisr_dies_more_often_than_updown_on_the_chain() {
    let model = ConstrainedChain::default();
    let mut sisr_deaths = 0;
    let mut updown_deaths = 0;
    for seed in 0..100 {
        sisr_deaths += run_sisr(&model, 1000, ResampleScheme::Multinomial, seed).is_err() as usize;
        updown_deaths += run_updown_smc(&model, 50, 20, seed).is_err() as usize;
    }
    assert!(sisr_deaths > updown_deaths, "SISR {sisr_deaths}, updown {updown_deaths}");
}

#[test]
fn chain_estimates_agree_with_quadrature() {
    let model = ConstrainedChain::default();
    let moments = model.exact_moments(8);
    let stat = ChainStatistic::Square(model.horizon).named();
    let exact = stat.kind().exact(&moments);
    let values: Vec<f64> = (0..60)
        .map(|r| estimate(run_updown_smc(&model, 500, 20, r).unwrap().ensemble.particles(), &stat).unwrap().point[0])
        .collect();
    let (mean, se) = mean_and_se(&values);
    assert!((mean - exact).abs() <= 3.0 * se, "{mean} vs {exact} (se {se})");
}
