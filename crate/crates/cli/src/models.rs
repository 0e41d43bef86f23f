//! Model construction, statistic parsing and ground truth per model kind.

use updown_core::models::{enumerate_exact, ChainStatistic, ConstrainedChain, HmmStatistic, ToyHmm};
use updown_core::protein::{BackboneGeometry, HostOptions, ProteinModel, ProteinStep, SegmentProblem};
use updown_core::statistics::{SegmentQuantity, SegmentStatistics};
use updown_core::tables::{parse_pdb, EnergyTables};
use updown_core::{estimate, EstimateReport, Particle, SmcError, Statistic};

use crate::config::{ChainConfig, ExperimentConfig, HmmConfig, ProteinConfig};
use crate::CliError;

/// The statistics of one experiment with one label per output component.
pub struct StatSet<'a, S> {
    stats: Vec<Box<dyn Statistic<S> + 'a>>,
    pub labels: Vec<String>,
    /// Plot position of each component (residue number or index).
    pub positions: Vec<i64>,
}

impl<'a, S> StatSet<'a, S> {
    fn new() -> Self {
        Self { stats: Vec::new(), labels: Vec::new(), positions: Vec::new() }
    }

    fn push_scalar(&mut self, stat: impl Statistic<S> + 'a) {
        self.positions.push(self.labels.len() as i64);
        self.labels.push(stat.name().to_string());
        self.stats.push(Box::new(stat));
    }

    /// Weighted estimates, flattened in label order.
    pub fn estimate(&self, particles: &[Particle<S>]) -> Result<Vec<f64>, SmcError> {
        Ok(self.reports(particles)?.into_iter().flat_map(|r| r.point).collect())
    }

    pub fn reports(&self, particles: &[Particle<S>]) -> Result<Vec<EstimateReport>, SmcError> {
        self.stats.iter().map(|s| estimate(particles, s.as_ref())).collect()
    }
}

/// How the reference values of a convergence study are obtained.
pub enum Truth {
    Exact { values: Vec<f64>, source: &'static str },
    Importance { draws: usize },
    Unavailable(String),
}

pub fn chain_model(config: Option<&ChainConfig>) -> Result<ConstrainedChain, CliError> {
    let mut m = ConstrainedChain::default();
    if let Some(c) = config {
        m.horizon = c.horizon.unwrap_or(m.horizon);
        m.target = c.target.unwrap_or(m.target);
        m.bound = c.bound.unwrap_or(m.bound);
        m.shrink = c.shrink.unwrap_or(m.shrink);
        m.init_sd = c.init_sd.unwrap_or(m.init_sd);
        m.step_scale = c.step_scale.unwrap_or(m.step_scale);
        m.decoy_depth = c.decoy_depth.unwrap_or(m.decoy_depth);
        m.decoy_width = c.decoy_width.unwrap_or(m.decoy_width);
        m.decoy_offset = c.decoy_offset.unwrap_or(m.decoy_offset);
    }
    let positive = [m.bound, m.shrink, m.init_sd, m.step_scale, m.decoy_width];
    if positive.iter().any(|v| !(*v > 0.0 && v.is_finite())) || m.decoy_depth < 0.0 {
        return Err(CliError::Config(
            "chain: bound, shrink, init_sd, step_scale and decoy_width must be positive".into(),
        ));
    }
    Ok(m)
}

pub fn chain_stats<'a>(model: &ConstrainedChain, names: &[String]) -> Result<StatSet<'a, f64>, CliError> {
    let kinds = if names.is_empty() {
        ChainStatistic::defaults(model)
    } else {
        names
            .iter()
            .map(|n| {
                ChainStatistic::parse(n)
                    .filter(|k| match k {
                        ChainStatistic::Position(t) | ChainStatistic::Square(t) => *t <= model.horizon,
                    })
                    .ok_or_else(|| {
                        CliError::Config(format!("unknown chain statistic `{n}` (use x[t] or x2[t], t <= T)"))
                    })
            })
            .collect::<Result<_, _>>()?
    };
    let mut set = StatSet::new();
    for k in kinds {
        set.push_scalar(k.named());
    }
    Ok(set)
}

pub fn chain_truth(model: &ConstrainedChain, set_labels: &[String], per_scale: usize) -> Truth {
    let moments = model.exact_moments(per_scale.max(1));
    let values = set_labels.iter().map(|l| ChainStatistic::parse(l).expect("parsed earlier").exact(&moments)).collect();
    Truth::Exact { values, source: "quadrature" }
}

pub fn hmm_model(config: Option<&HmmConfig>) -> Result<ToyHmm, CliError> {
    match config {
        None => Ok(ToyHmm::three_state_demo()),
        Some(c) => ToyHmm::new(c.initial.clone(), c.transition.clone(), c.emission.clone(), c.observations.clone())
            .map_err(|e| CliError::Config(format!("hmm: {e}"))),
    }
}

fn parse_hmm_statistic(s: &str, horizon: usize, states: usize) -> Option<HmmStatistic> {
    if s == "path_sum" {
        return Some(HmmStatistic::PathSum);
    }
    if let Some(inner) = s.strip_prefix("1[x").and_then(|r| r.strip_suffix(']')) {
        let (t, state) = inner.split_once('=')?;
        let (t, state) = (t.parse().ok()?, state.parse().ok()?);
        return (t <= horizon && state < states).then_some(HmmStatistic::Indicator { t, state });
    }
    let t: usize = s.strip_prefix('x')?.parse().ok()?;
    (t <= horizon).then_some(HmmStatistic::StateAt(t))
}

pub fn hmm_stats<'a>(model: &ToyHmm, names: &[String]) -> Result<StatSet<'a, usize>, CliError> {
    use updown_core::SequentialModel;
    let horizon = model.horizon();
    let kinds = if names.is_empty() {
        vec![
            HmmStatistic::Indicator { t: horizon / 2, state: 1.min(model.n_states() - 1) },
            HmmStatistic::PathSum,
            HmmStatistic::StateAt(horizon),
        ]
    } else {
        names
            .iter()
            .map(|n| {
                parse_hmm_statistic(n, horizon, model.n_states()).ok_or_else(|| {
                    CliError::Config(format!("unknown HMM statistic `{n}` (use path_sum, x<t> or 1[x<t>=<s>])"))
                })
            })
            .collect::<Result<_, _>>()?
    };
    let mut set = StatSet::new();
    for k in kinds {
        set.push_scalar(k.named());
    }
    Ok(set)
}

pub fn hmm_truth(model: &ToyHmm, set: &StatSet<usize>) -> Result<Truth, CliError> {
    let mut values = Vec::new();
    for s in &set.stats {
        values.extend(enumerate_exact(model, s.as_ref()).map_err(|e| CliError::Config(format!("enumeration: {e}")))?);
    }
    Ok(Truth::Exact { values, source: "enumeration" })
}

pub fn protein_model(p: &ProteinConfig) -> Result<ProteinModel, CliError> {
    let missing: Vec<String> = [&p.pdb, &p.potential, &p.dihedrals, &p.closure]
        .iter()
        .filter(|f| !f.is_file())
        .map(|f| f.display().to_string())
        .collect();
    if !missing.is_empty() {
        return Err(CliError::Config(format!("protein input files not found: {}", missing.join(", "))));
    }
    let tables = EnergyTables::load(&p.potential, &p.dihedrals, &p.closure)
        .map_err(|e| CliError::Config(format!("tables: {e}")))?;
    let structure = parse_pdb(&p.pdb).map_err(|e| CliError::Config(format!("{}: {e}", p.pdb.display())))?;
    let options = HostOptions { exclude_elements: p.exclude_elements.clone() };
    let problem = SegmentProblem::from_structure(&structure, p.chain_id()?, p.start, p.length, &options)
        .map_err(|e| CliError::Config(format!("segment: {e}")))?;
    ProteinModel::new(problem, &tables, BackboneGeometry::default())
        .map_err(|e| CliError::Config(format!("protein model: {e}")))
}

fn parse_segment_quantity(s: &str) -> Option<SegmentQuantity> {
    if let Some(r) = s.strip_prefix("n(CA_").and_then(|r| r.strip_suffix(')')) {
        return r.parse().ok().map(SegmentQuantity::Contacts);
    }
    let inner = s.strip_prefix("d(CA_")?.strip_suffix(')')?;
    let (i, j) = inner.split_once(",CA_")?;
    Some(SegmentQuantity::CaDistance(i.parse().ok()?, j.parse().ok()?))
}

/// `contacts` expands to the contacts of every placed `Cα`.
pub fn protein_stats<'a>(
    model: &'a ProteinModel,
    names: &[String],
    p: &ProteinConfig,
) -> Result<StatSet<'a, ProteinStep>, CliError> {
    let mut items = Vec::new();
    let names: Vec<String> = if names.is_empty() { vec!["contacts".into()] } else { names.to_vec() };
    for n in &names {
        if n == "contacts" {
            items.extend(model.problem().placed_ca_residues().map(SegmentQuantity::Contacts));
        } else {
            items.push(parse_segment_quantity(n).ok_or_else(|| {
                CliError::Config(format!(
                    "unknown protein statistic `{n}` (use contacts, n(CA_<r>) or d(CA_<i>,CA_<j>))"
                ))
            })?);
        }
    }
    let mut stats = SegmentStatistics::new(model, "segment", items.clone(), p.radius);
    stats.include_segment = p.include_segment;
    // Fail now, not inside a run, if a residue has no Cα.
    let native = native_path(model)?;
    if native.len() == model.problem().native.len() && !native.is_empty() {
        stats.try_eval(&native).map_err(|e| CliError::Config(format!("statistics: {e}")))?;
    }
    let mut set = StatSet::new();
    set.labels = stats.labels();
    set.positions = items
        .iter()
        .map(|q| match q {
            SegmentQuantity::Contacts(r) | SegmentQuantity::CaDistance(r, _) => *r as i64,
        })
        .collect();
    set.stats.push(Box::new(stats));
    Ok(set)
}

pub fn protein_truth(config: &ExperimentConfig) -> Truth {
    match config.converge.as_ref().and_then(|c| c.truth_draws) {
        Some(draws) => Truth::Importance { draws },
        None => Truth::Unavailable("the protein model has no exact oracle; set converge.truth_draws".into()),
    }
}

/// The native loop as a path, placed with the model geometry.
pub fn native_path(model: &ProteinModel) -> Result<Vec<ProteinStep>, CliError> {
    let mut path = Vec::with_capacity(model.problem().native.len());
    for triple in &model.problem().native {
        let atoms = model.place(&path, triple).map_err(|e| CliError::Config(format!("native loop: {e}")))?;
        path.push(ProteinStep { triple: *triple, atoms });
    }
    Ok(path)
}
