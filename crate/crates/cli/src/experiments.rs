//! The three experiment designs and table generation.

use std::path::Path;
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;
use updown_core::rng::{Domain, StreamKey};
use updown_core::smc::{RunDiagnostics, StepAction};
use updown_core::tables::{generate_synthetic_tables, SyntheticSpec, MINI_LOOP_LENGTH, MINI_LOOP_START};
use updown_core::{run_importance_sampling, run_updown_smc, SequentialModel, SmcError};

use crate::config::{ConvergeConfig, ExperimentConfig, ModelKind, ProfileConfig, VarianceConfig};
use crate::models::{self, StatSet, Truth};
use crate::CliError;

pub const UPDOWN: &str = "updown";
pub const IMPORTANCE: &str = "importance";

/// One row per (run, statistic) of `results.csv`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResultRow {
    pub experiment: String,
    pub method: String,
    pub mn: usize,
    pub m: usize,
    pub n: usize,
    pub repetition: usize,
    pub statistic: String,
    /// Empty when the run died.
    pub value: Option<f64>,
    pub died: bool,
    pub death_step: Option<usize>,
}

/// Wall time of one run, kept apart from `results.csv` so that file is
/// reproducible byte for byte.
#[derive(Debug, Clone, Serialize)]
pub struct TimingRow {
    pub experiment: String,
    pub method: String,
    pub m: usize,
    pub n: usize,
    pub repetition: usize,
    pub runtime_s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VarianceSummaryRow {
    pub mn: usize,
    pub m: usize,
    pub n: usize,
    pub statistic: String,
    pub runs: usize,
    pub completed: usize,
    pub died: usize,
    pub mean: Option<f64>,
    /// Sample variance over completed runs; empty below two.
    pub variance: Option<f64>,
    pub variance_divisor: Option<usize>,
}

pub struct VarianceOutcome {
    pub rows: Vec<ResultRow>,
    pub timings: Vec<TimingRow>,
    pub summary: Vec<VarianceSummaryRow>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RmseRow {
    pub method: String,
    pub n: usize,
    /// Full-path proposals per run: `M·N` for both methods.
    pub budget: usize,
    pub statistic: String,
    pub truth: f64,
    pub completed: usize,
    pub died: usize,
    pub rmse: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SlopeRow {
    pub method: String,
    pub statistic: String,
    pub points: usize,
    /// Least-squares slope of `ln RMSE` on `ln N`.
    pub slope: Option<f64>,
    /// Consecutive grid points where the RMSE went up.
    pub inversions: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TruthRow {
    pub statistic: String,
    pub value: f64,
    pub source: String,
    pub draws: Option<usize>,
    pub accepted: Option<usize>,
    /// Estimates on the two halves of the samples, and their gap.
    pub half_a: Option<f64>,
    pub half_b: Option<f64>,
    pub split_gap: Option<f64>,
}

pub struct ConvergeOutcome {
    pub rows: Vec<ResultRow>,
    pub timings: Vec<TimingRow>,
    pub rmse: Vec<RmseRow>,
    pub slopes: Vec<SlopeRow>,
    pub truth: Vec<TruthRow>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProfileRow {
    pub position: i64,
    pub statistic: String,
    pub estimate: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiagnosticRow {
    pub step: usize,
    pub candidates: usize,
    pub positive: usize,
    pub action: String,
    pub threshold: Option<f64>,
    pub kept: usize,
}

pub struct ProfileOutcome {
    pub rows: Vec<ProfileRow>,
    pub diagnostics: Vec<DiagnosticRow>,
    pub n_distinct: usize,
    pub ess: f64,
    pub runtime_s: f64,
    /// Set when every particle died; the rows are then empty.
    pub died_at: Option<usize>,
}

/// Seed of one updown run, a function of the cell and repetition only.
pub fn updown_seed(seed: u64, n: usize, m: usize, repetition: usize) -> u64 {
    StreamKey::new(seed).derive(Domain::Repetition, n as u64, m as u64, repetition as u64).seed()
}

pub fn importance_seed(seed: u64, budget: usize, repetition: usize) -> u64 {
    StreamKey::new(seed).derive(Domain::Importance, budget as u64, 0, repetition as u64).seed()
}

fn truth_seed(seed: u64, draws: usize) -> u64 {
    StreamKey::new(seed).derive(Domain::Importance, draws as u64, u64::MAX, 0).seed()
}

pub fn action_label(action: StepAction) -> String {
    match action {
        StepAction::Optimal => "optimal".into(),
        StepAction::WithReplacement => "with-replacement".into(),
        StepAction::Weighted => "weighted".into(),
        StepAction::Resampled(s) => format!("resampled-{s}"),
    }
}

pub fn diagnostic_rows(d: &RunDiagnostics) -> Vec<DiagnosticRow> {
    d.steps
        .iter()
        .map(|r| DiagnosticRow {
            step: r.step,
            candidates: r.candidates,
            positive: r.positive_count,
            action: action_label(r.action),
            threshold: r.threshold,
            kept: r.kept,
        })
        .collect()
}

/// Outcome of one repetition: estimates, or the step where it died.
struct RepResult {
    values: Result<Vec<f64>, Option<usize>>,
    seconds: f64,
}

fn classify(err: SmcError) -> Result<Option<usize>, CliError> {
    match err {
        SmcError::AllParticlesDead { step, .. } => Ok(Some(step)),
        SmcError::NoMass => Ok(None),
        other => Err(CliError::Run(other)),
    }
}

fn updown_rep<M: SequentialModel>(
    model: &M,
    stats: &StatSet<M::State>,
    n: usize,
    m: usize,
    seed: u64,
) -> Result<RepResult, CliError> {
    let start = Instant::now();
    let values = match run_updown_smc(model, n, m, seed) {
        Ok(run) => Ok(stats.estimate(run.ensemble.particles())?),
        Err(e) => Err(classify(e)?),
    };
    Ok(RepResult { values, seconds: start.elapsed().as_secs_f64() })
}

/// Importance sampling with every one of `budget` draws kept; a run without
/// a single positive-weight path counts as dead.
fn importance_rep<M: SequentialModel>(
    model: &M,
    stats: &StatSet<M::State>,
    budget: usize,
    seed: u64,
) -> Result<RepResult, CliError> {
    let start = Instant::now();
    let set = run_importance_sampling(model, budget, budget, seed)?;
    let values = if set.positive() == 0 {
        Err(None)
    } else {
        match stats.estimate(&set.samples) {
            Ok(v) => Ok(v),
            Err(e) => Err(classify(e)?),
        }
    };
    Ok(RepResult { values, seconds: start.elapsed().as_secs_f64() })
}

struct Cell<'a> {
    experiment: &'a str,
    method: &'a str,
    m: usize,
    n: usize,
}

fn emit(cell: &Cell, labels: &[String], reps: &[RepResult], rows: &mut Vec<ResultRow>, timings: &mut Vec<TimingRow>) {
    for (r, rep) in reps.iter().enumerate() {
        for (k, label) in labels.iter().enumerate() {
            let (value, death_step) = match &rep.values {
                Ok(v) => (Some(v[k]), None),
                Err(step) => (None, *step),
            };
            rows.push(ResultRow {
                experiment: cell.experiment.into(),
                method: cell.method.into(),
                mn: cell.m * cell.n,
                m: cell.m,
                n: cell.n,
                repetition: r,
                statistic: label.clone(),
                value,
                died: value.is_none(),
                death_step,
            });
        }
        timings.push(TimingRow {
            experiment: cell.experiment.into(),
            method: cell.method.into(),
            m: cell.m,
            n: cell.n,
            repetition: r,
            runtime_s: rep.seconds,
        });
    }
}

fn completed_values(reps: &[RepResult], k: usize) -> Vec<f64> {
    reps.iter().filter_map(|r| r.values.as_ref().ok().map(|v| v[k])).collect()
}

fn mean(values: &[f64]) -> Option<f64> {
    (!values.is_empty()).then(|| values.iter().sum::<f64>() / values.len() as f64)
}

/// Runs the model's arm of a generic experiment body.
macro_rules! with_model {
    ($config:expr, |$model:ident, $stats:ident, $truth:ident| $body:expr) => {{
        let config: &ExperimentConfig = $config;
        match config.model {
            ModelKind::ConstrainedChain => {
                let $model = models::chain_model(config.chain.as_ref())?;
                let $stats = models::chain_stats(&$model, &config.statistics)?;
                let per_scale = config.converge.as_ref().map_or(8, |c| c.truth_per_scale);
                let $truth = || -> Result<Truth, CliError> {
                    Ok(match config.converge.as_ref().and_then(|c| c.truth_draws) {
                        Some(draws) => Truth::Importance { draws },
                        None => models::chain_truth(&$model, &$stats.labels, per_scale),
                    })
                };
                $body
            }
            ModelKind::ToyHmm => {
                let $model = models::hmm_model(config.hmm.as_ref())?;
                let $stats = models::hmm_stats(&$model, &config.statistics)?;
                let $truth = || -> Result<Truth, CliError> {
                    match config.converge.as_ref().and_then(|c| c.truth_draws) {
                        Some(draws) => Ok(Truth::Importance { draws }),
                        None => models::hmm_truth(&$model, &$stats),
                    }
                };
                $body
            }
            ModelKind::Protein => {
                let p = config.protein.as_ref().ok_or_else(|| CliError::Config("missing [protein] section".into()))?;
                let $model = models::protein_model(p)?;
                let $stats = models::protein_stats(&$model, &config.statistics, p)?;
                let $truth = || -> Result<Truth, CliError> { Ok(models::protein_truth(config)) };
                $body
            }
        }
    }};
}

/// `R` repetitions for every `(M, MN / M)` cell.
pub fn run_variance_experiment(config: &ExperimentConfig) -> Result<VarianceOutcome, CliError> {
    let v = config.variance.as_ref().ok_or_else(|| CliError::Config("missing [variance] section".into()))?;
    with_model!(config, |model, stats, _truth| variance_body(&model, &stats, config, v))
}

fn variance_body<M: SequentialModel>(
    model: &M,
    stats: &StatSet<M::State>,
    config: &ExperimentConfig,
    v: &VarianceConfig,
) -> Result<VarianceOutcome, CliError> {
    let mut out = VarianceOutcome { rows: Vec::new(), timings: Vec::new(), summary: Vec::new() };
    for (m, n) in v.cells()? {
        let reps = (0..config.repetitions)
            .into_par_iter()
            .map(|r| updown_rep(model, stats, n, m, updown_seed(config.seed, n, m, r)))
            .collect::<Result<Vec<_>, _>>()?;
        let cell = Cell { experiment: "variance", method: UPDOWN, m, n };
        emit(&cell, &stats.labels, &reps, &mut out.rows, &mut out.timings);
        for (k, label) in stats.labels.iter().enumerate() {
            let values = completed_values(&reps, k);
            let mu = mean(&values);
            let divisor = (values.len() >= 2).then(|| values.len() - 1);
            let variance = divisor.map(|d| {
                let mu = mu.expect("non-empty");
                values.iter().map(|x| (x - mu).powi(2)).sum::<f64>() / d as f64
            });
            out.summary.push(VarianceSummaryRow {
                mn: v.mn,
                m,
                n,
                statistic: label.clone(),
                runs: reps.len(),
                completed: values.len(),
                died: reps.len() - values.len(),
                mean: mu,
                variance,
                variance_divisor: divisor,
            });
        }
    }
    Ok(out)
}

/// RMSE against `N` at fixed `M`, with the importance-sampling baseline at
/// the same number of full-path proposals.
pub fn run_convergence_experiment(config: &ExperimentConfig) -> Result<ConvergeOutcome, CliError> {
    let c = config.converge.as_ref().ok_or_else(|| CliError::Config("missing [converge] section".into()))?;
    with_model!(config, |model, stats, truth| {
        let truth_rows = resolve_truth(&model, &stats, truth()?, config.seed)?;
        converge_body(&model, &stats, truth_rows, config, c)
    })
}

fn resolve_truth<M: SequentialModel>(
    model: &M,
    stats: &StatSet<M::State>,
    truth: Truth,
    seed: u64,
) -> Result<Vec<TruthRow>, CliError> {
    match truth {
        Truth::Unavailable(why) => Err(CliError::OracleUnavailable(why)),
        Truth::Exact { values, source } => Ok(stats
            .labels
            .iter()
            .zip(values)
            .map(|(label, value)| TruthRow {
                statistic: label.clone(),
                value,
                source: source.into(),
                draws: None,
                accepted: None,
                half_a: None,
                half_b: None,
                split_gap: None,
            })
            .collect()),
        Truth::Importance { draws } => {
            let set = run_importance_sampling(model, draws, draws, truth_seed(seed, draws))?;
            let accepted = set.positive();
            if accepted < 2 {
                return Err(CliError::OracleUnavailable(format!(
                    "{accepted} of {draws} importance draws have positive weight"
                )));
            }
            let all = stats.estimate(&set.samples)?;
            // Draws are i.i.d., so alternating indices is a random split.
            let (even, odd): (Vec<_>, Vec<_>) = set.samples.iter().cloned().enumerate().partition(|(i, _)| i % 2 == 0);
            let strip = |v: Vec<(usize, _)>| v.into_iter().map(|(_, p)| p).collect::<Vec<_>>();
            let (even, odd) = (strip(even), strip(odd));
            let a = stats.estimate(&even).ok();
            let b = stats.estimate(&odd).ok();
            Ok(stats
                .labels
                .iter()
                .enumerate()
                .map(|(k, label)| {
                    let (ha, hb) = (a.as_ref().map(|v| v[k]), b.as_ref().map(|v| v[k]));
                    TruthRow {
                        statistic: label.clone(),
                        value: all[k],
                        source: "importance".into(),
                        draws: Some(draws),
                        accepted: Some(accepted),
                        half_a: ha,
                        half_b: hb,
                        split_gap: ha.zip(hb).map(|(x, y)| (x - y).abs()),
                    }
                })
                .collect())
        }
    }
}

fn converge_body<M: SequentialModel>(
    model: &M,
    stats: &StatSet<M::State>,
    truth: Vec<TruthRow>,
    config: &ExperimentConfig,
    c: &ConvergeConfig,
) -> Result<ConvergeOutcome, CliError> {
    let mut out =
        ConvergeOutcome { rows: Vec::new(), timings: Vec::new(), rmse: Vec::new(), slopes: Vec::new(), truth };
    let factor = c.importance_factor.unwrap_or(c.m);
    let mut methods = vec![(UPDOWN, c.m)];
    if c.importance {
        methods.push((IMPORTANCE, factor));
    }
    for &(method, m) in &methods {
        for &n in &c.n {
            let reps = (0..config.repetitions)
                .into_par_iter()
                .map(|r| match method {
                    UPDOWN => updown_rep(model, stats, n, m, updown_seed(config.seed, n, m, r)),
                    _ => importance_rep(model, stats, m * n, importance_seed(config.seed, m * n, r)),
                })
                .collect::<Result<Vec<_>, _>>()?;
            let cell = Cell { experiment: "converge", method, m, n };
            emit(&cell, &stats.labels, &reps, &mut out.rows, &mut out.timings);
            for (k, label) in stats.labels.iter().enumerate() {
                let values = completed_values(&reps, k);
                let t = out.truth[k].value;
                let rmse = mean(&values.iter().map(|x| (x - t).powi(2)).collect::<Vec<_>>()).map(f64::sqrt);
                out.rmse.push(RmseRow {
                    method: method.into(),
                    n,
                    budget: m * n,
                    statistic: label.clone(),
                    truth: t,
                    completed: values.len(),
                    died: reps.len() - values.len(),
                    rmse,
                });
            }
        }
        for label in &stats.labels {
            let points: Vec<(usize, f64)> = out
                .rmse
                .iter()
                .filter(|r| r.method == method && &r.statistic == label)
                .filter_map(|r| r.rmse.filter(|x| *x > 0.0).map(|x| (r.n, x)))
                .collect();
            out.slopes.push(SlopeRow {
                method: method.into(),
                statistic: label.clone(),
                points: points.len(),
                slope: log_log_slope(&points),
                inversions: points.windows(2).filter(|w| w[1].1 > w[0].1).count(),
            });
        }
    }
    Ok(out)
}

/// Least-squares slope of `ln y` on `ln x`.
pub fn log_log_slope(points: &[(usize, f64)]) -> Option<f64> {
    if points.len() < 2 {
        return None;
    }
    let xs: Vec<f64> = points.iter().map(|p| (p.0 as f64).ln()).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    let k = xs.len() as f64;
    let (mx, my) = (xs.iter().sum::<f64>() / k, ys.iter().sum::<f64>() / k);
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

/// One run at `(N, M)`; a dead run is reported in the outcome, not as an
/// error, so its diagnostics can still be written.
pub fn run_segment_profile(config: &ExperimentConfig) -> Result<ProfileOutcome, CliError> {
    let p = config.profile.as_ref().ok_or_else(|| CliError::Config("missing [profile] section".into()))?;
    with_model!(config, |model, stats, _truth| profile_body(&model, &stats, config, p))
}

fn profile_body<M: SequentialModel>(
    model: &M,
    stats: &StatSet<M::State>,
    config: &ExperimentConfig,
    p: &ProfileConfig,
) -> Result<ProfileOutcome, CliError> {
    let start = Instant::now();
    match run_updown_smc(model, p.n, p.m, updown_seed(config.seed, p.n, p.m, 0)) {
        Ok(run) => {
            let reports = stats.reports(run.ensemble.particles())?;
            let values: Vec<f64> = reports.iter().flat_map(|r| r.point.iter().copied()).collect();
            let rows = stats
                .labels
                .iter()
                .zip(&stats.positions)
                .zip(values)
                .map(|((label, &position), estimate)| ProfileRow { position, statistic: label.clone(), estimate })
                .collect();
            Ok(ProfileOutcome {
                rows,
                diagnostics: diagnostic_rows(&run.diagnostics),
                n_distinct: run.ensemble.n_distinct(),
                ess: reports.first().map_or(f64::NAN, |r| r.ess),
                runtime_s: start.elapsed().as_secs_f64(),
                died_at: None,
            })
        }
        Err(SmcError::AllParticlesDead { step, diagnostics }) => Ok(ProfileOutcome {
            rows: Vec::new(),
            diagnostics: diagnostic_rows(&diagnostics),
            n_distinct: 0,
            ess: 0.0,
            runtime_s: start.elapsed().as_secs_f64(),
            died_at: Some(step),
        }),
        Err(e) => Err(e.into()),
    }
}

/// Synthetic tables, the mini protein and a ready-to-run profile config.
pub fn gen_tables(seed: u64, out_dir: &Path) -> Result<Vec<std::path::PathBuf>, CliError> {
    let spec = SyntheticSpec::default();
    let files = generate_synthetic_tables(&spec, seed, out_dir).map_err(|e| CliError::Output(e.to_string()))?;
    let profile = out_dir.join("profile.toml");
    let text = format!(
        "model = \"protein\"\nseed = {seed}\nstatistics = [\"contacts\"]\n\n[profile]\nn = 2000\nm = 20\n\n\
         [protein]\npdb = \"mini.pdb\"\npotential = \"potential.tbl\"\ndihedrals = \"dihedral.tbl\"\n\
         closure = \"closure.tbl\"\nchain = \"A\"\nstart = {}\nlength = {}\n",
        MINI_LOOP_START, MINI_LOOP_LENGTH
    );
    std::fs::write(&profile, text).map_err(|e| CliError::Output(format!("{}: {e}", profile.display())))?;
    Ok(vec![files.potential, files.dihedrals, files.closure, files.pdb, profile])
}
