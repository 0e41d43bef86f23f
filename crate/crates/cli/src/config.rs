//! Experiment configuration files (TOML, or JSON for `.json` paths).

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModelKind {
    ToyHmm,
    ConstrainedChain,
    Protein,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub model: ModelKind,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default = "default_repetitions")]
    pub repetitions: usize,
    /// Statistic names; empty means the model's defaults.
    #[serde(default)]
    pub statistics: Vec<String>,
    pub out: Option<PathBuf>,
    pub variance: Option<VarianceConfig>,
    pub converge: Option<ConvergeConfig>,
    pub profile: Option<ProfileConfig>,
    pub protein: Option<ProteinConfig>,
    pub chain: Option<ChainConfig>,
    pub hmm: Option<HmmConfig>,
}

fn default_seed() -> u64 {
    1
}

fn default_repetitions() -> usize {
    1
}

/// Cells `(M, MN / M)` at a fixed total `MN`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VarianceConfig {
    pub mn: usize,
    pub m: Vec<usize>,
}

impl VarianceConfig {
    pub fn cells(&self) -> Result<Vec<(usize, usize)>, CliError> {
        if self.m.is_empty() {
            return Err(CliError::Config("variance.m is empty".into()));
        }
        self.m
            .iter()
            .map(|&m| {
                if m == 0 || self.mn % m != 0 || self.mn / m == 0 {
                    Err(CliError::Config(format!("variance: M = {m} does not divide MN = {}", self.mn)))
                } else {
                    Ok((m, self.mn / m))
                }
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConvergeConfig {
    pub m: usize,
    pub n: Vec<usize>,
    /// Run the importance-sampling baseline at `importance_factor · N` full
    /// path draws per repetition.
    #[serde(default = "yes")]
    pub importance: bool,
    /// Defaults to `m`: the same number of proposals per step as the SMC run.
    pub importance_factor: Option<usize>,
    /// Draws for the importance-sampling ground truth (protein model).
    pub truth_draws: Option<usize>,
    /// Quadrature nodes per length scale for the chain ground truth.
    #[serde(default = "default_per_scale")]
    pub truth_per_scale: usize,
}

fn yes() -> bool {
    true
}

fn default_per_scale() -> usize {
    8
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProfileConfig {
    pub n: usize,
    pub m: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProteinConfig {
    pub pdb: PathBuf,
    pub potential: PathBuf,
    pub dihedrals: PathBuf,
    pub closure: PathBuf,
    #[serde(default = "default_chain")]
    pub chain: String,
    /// First residue number of the segment.
    pub start: i32,
    /// Number of residues, `T + 1`.
    pub length: usize,
    #[serde(default = "default_radius")]
    pub radius: f64,
    /// Count other segment atoms toward the contacts of segment `Cα` atoms.
    #[serde(default = "yes")]
    pub include_segment: bool,
    #[serde(default = "default_excluded")]
    pub exclude_elements: Vec<String>,
}

fn default_chain() -> String {
    "A".into()
}

fn default_radius() -> f64 {
    7.0
}

fn default_excluded() -> Vec<String> {
    vec!["H".into(), "D".into()]
}

impl ProteinConfig {
    pub fn chain_id(&self) -> Result<char, CliError> {
        let mut chars = self.chain.chars();
        match (chars.next(), chars.next()) {
            (Some(c), None) => Ok(c),
            _ => Err(CliError::Config(format!("protein.chain must be one character, got `{}`", self.chain))),
        }
    }
}

/// Overrides of the constrained chain's defaults.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChainConfig {
    pub horizon: Option<usize>,
    pub target: Option<f64>,
    pub bound: Option<f64>,
    pub shrink: Option<f64>,
    pub init_sd: Option<f64>,
    pub step_scale: Option<f64>,
    pub decoy_depth: Option<f64>,
    pub decoy_width: Option<f64>,
    pub decoy_offset: Option<f64>,
}

/// A custom toy HMM; absent means the built-in three-state demo.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HmmConfig {
    pub initial: Vec<f64>,
    pub transition: Vec<Vec<f64>>,
    pub emission: Vec<Vec<f64>>,
    pub observations: Vec<usize>,
}

impl ExperimentConfig {
    /// Reads a config file; relative input paths are resolved against the
    /// file's directory.
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read config {}: {e}", path.display())))?;
        let mut config: ExperimentConfig = if path.extension().is_some_and(|e| e == "json") {
            serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?
        } else {
            toml::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?
        };
        let base = path.parent().unwrap_or(Path::new("."));
        if let Some(p) = &mut config.protein {
            for f in [&mut p.pdb, &mut p.potential, &mut p.dihedrals, &mut p.closure] {
                if f.is_relative() {
                    *f = base.join(&*f);
                }
            }
        }
        if let Some(out) = &mut config.out {
            if out.is_relative() {
                *out = base.join(&*out);
            }
        }
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if self.repetitions == 0 {
            return Err(CliError::Config("repetitions must be at least 1".into()));
        }
        if let Some(v) = &self.variance {
            v.cells()?;
        }
        if let Some(c) = &self.converge {
            if c.m == 0 || c.n.is_empty() || c.n.contains(&0) {
                return Err(CliError::Config("converge needs M >= 1 and a non-empty list of N >= 1".into()));
            }
        }
        if let Some(p) = &self.profile {
            if p.n == 0 || p.m == 0 {
                return Err(CliError::Config("profile needs N >= 1 and M >= 1".into()));
            }
        }
        if let Some(p) = &self.protein {
            p.chain_id()?;
            if p.radius.is_nan() || p.radius <= 0.0 {
                return Err(CliError::Config("protein.radius must be positive".into()));
            }
        }
        if self.model == ModelKind::Protein && self.protein.is_none() {
            return Err(CliError::Config(
                "model = \"protein\" needs a [protein] section with pdb and table paths".into(),
            ));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_toml_and_checks_cells() {
        let c: ExperimentConfig = toml::from_str(
            r#"
            model = "constrained-chain"
            seed = 9
            repetitions = 10
            [variance]
            mn = 10000
            m = [1, 5, 20, 100]
            "#,
        )
        .unwrap();
        assert_eq!(c.variance.as_ref().unwrap().cells().unwrap(), vec![(1, 10000), (5, 2000), (20, 500), (100, 100)]);
        c.validate().unwrap();
        let bad = VarianceConfig { mn: 100, m: vec![3] };
        assert!(bad.cells().is_err());
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(toml::from_str::<ExperimentConfig>("model = \"toy-hmm\"\nreps = 3\n").is_err());
        assert!(toml::from_str::<ExperimentConfig>("model = \"nope\"\n").is_err());
    }

    #[test]
    fn protein_requires_inputs() {
        let c: ExperimentConfig = toml::from_str("model = \"protein\"\n").unwrap();
        assert!(matches!(c.validate(), Err(CliError::Config(_))));
    }
}
