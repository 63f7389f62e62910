//! Experiment configuration: one versioned TOML (or JSON) document.

use std::path::{Path, PathBuf};

use imblab_core::analysis::{ClassSampling, SubsetRule};
use imblab_core::dataset::InputDistribution;
use imblab_core::optim::{AdamParams, BatchMode, Engine, Family, Reweight};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub schema_version: u32,
    pub name: String,
    /// Output directory, relative to the working directory.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out_dir: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dataset: Option<DatasetSource>,
    #[serde(default)]
    pub model: ModelConfig,
    #[serde(default, rename = "optimizer", skip_serializing_if = "Vec::is_empty")]
    pub optimizers: Vec<OptimizerSpec>,
    #[serde(default)]
    pub grid: GridConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub train: Option<TrainSection>,
    #[serde(default)]
    pub analysis: AnalysisConfig,
    #[serde(default)]
    pub output: OutputConfig,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub theory: Vec<TheoryCase>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub quadratic: Option<QuadraticConfig>,
}

/// How the training data is produced.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum DatasetSource {
    /// Tiers of `2^(j-1)` classes with `2^(m-j+1)` samples each, random inputs.
    HeavyTailed {
        m: u32,
        distribution: InputDistribution,
        seed: u64,
        #[serde(default)]
        extra_tier: bool,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        input_dim: Option<usize>,
    },
    /// One basis-vector input per class, weighted by the given frequencies.
    SimpleImbalanced { weights: Vec<f64> },
    /// As `simple_imbalanced` with weights `k^(-exponent)`.
    SimpleZipf { classes: usize, exponent: f64 },
    /// Zipf class counts over `samples` rows of random inputs.
    SampledZipf {
        classes: usize,
        exponent: f64,
        samples: u64,
        input_dim: usize,
        distribution: InputDistribution,
        seed: u64,
    },
    /// A dataset directory written by `dataset gen` or a previous run.
    Files { path: PathBuf },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitSpec {
    Zeros,
    Gaussian { sigma: f64, seed: u64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelConfig {
    pub bias: bool,
    pub init: InitSpec,
}

impl Default for ModelConfig {
    fn default() -> Self {
        ModelConfig {
            bias: true,
            init: InitSpec::Zeros,
        }
    }
}

/// One optimizer to train with. Without `alpha` the step size is grid
/// searched.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OptimizerSpec {
    /// Output subdirectory; defaults to the family name.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    pub family: Family,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(default)]
    pub beta: f64,
    #[serde(default)]
    pub adam: AdamParams,
    #[serde(default)]
    pub reweight: Reweight,
    #[serde(default)]
    pub batch: BatchMode,
    #[serde(default)]
    pub engine: Engine,
}

impl OptimizerSpec {
    pub fn label(&self) -> String {
        self.label.clone().unwrap_or_else(|| self.family.name().to_string())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridConfig {
    pub exponents: Vec<i32>,
    pub refine: bool,
    pub seeds: Vec<u64>,
}

impl Default for GridConfig {
    fn default() -> Self {
        GridConfig {
            exponents: (-6..=1).collect(),
            refine: true,
            seeds: vec![0],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum CheckpointSpec {
    Every { every: usize },
    Log { per_decade: usize },
    List { steps: Vec<usize> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrainSection {
    pub steps: usize,
    pub checkpoints: CheckpointSpec,
    /// Minibatch shuffling seed of the logged run.
    #[serde(default)]
    pub seed: u64,
    /// Per-class gradient norms and Hessian traces at every checkpoint.
    #[serde(default = "yes")]
    pub block_stats: bool,
}

fn yes() -> bool {
    true
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HeatmapConfig {
    pub classes: usize,
    pub dims: usize,
    #[serde(default)]
    pub sampling: ClassSampling,
    #[serde(default)]
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AnalysisConfig {
    /// Frequency groups for per-group losses (capped at the class count).
    pub groups: usize,
    pub subset_rule: SubsetRule,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub heatmap: Option<HeatmapConfig>,
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        AnalysisConfig {
            groups: 10,
            subset_rule: SubsetRule::default(),
            heatmap: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    /// Write the dataset directory.
    pub dataset: bool,
    /// Write each final model.
    pub model: bool,
}

impl Default for OutputConfig {
    fn default() -> Self {
        OutputConfig {
            dataset: true,
            model: true,
        }
    }
}

/// Gradient flow versus sign descent on the simple setting.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TheoryCase {
    pub c: usize,
    pub pi: f64,
    pub t_max: f64,
    /// RK4 step in units of `1/(c·pi)`.
    #[serde(default = "default_dt")]
    pub dt: f64,
    #[serde(default = "default_rows")]
    pub rows: usize,
}

fn default_dt() -> f64 {
    1e-3
}

fn default_rows() -> usize {
    101
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuadraticConfig {
    pub pi: Vec<f64>,
    /// Defaults to all ones.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub w0: Option<Vec<f64>>,
    pub alpha: f64,
    /// Sign-descent step size; defaults to `alpha`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sign_alpha: Option<f64>,
    pub steps: usize,
}

impl ExperimentConfig {
    /// Parse TOML, or JSON when `path` ends in `.json`.
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Config {
            field: String::new(),
            message: format!("cannot read {}: {e}", path.display()),
        })?;
        if path.extension().is_some_and(|e| e == "json") {
            Self::from_json(&text)
        } else {
            Self::from_toml(&text)
        }
    }

    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        let de = toml::Deserializer::new(text);
        let cfg: Self = serde_path_to_error::deserialize(de).map_err(|e| CliError::Config {
            field: e.path().to_string(),
            message: e.inner().message().trim().to_string(),
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_json(text: &str) -> Result<Self, CliError> {
        let mut de = serde_json::Deserializer::from_str(text);
        let cfg: Self = serde_path_to_error::deserialize(&mut de).map_err(|e| CliError::Config {
            field: e.path().to_string(),
            message: e.inner().to_string(),
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes to TOML")
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("config serializes to JSON");
        s.push('\n');
        s
    }

    /// Structural checks that do not need the dataset.
    pub fn validate(&self) -> Result<(), CliError> {
        let bad = |field: &str, message: &str| {
            Err(CliError::Config {
                field: field.to_string(),
                message: message.to_string(),
            })
        };
        if self.schema_version != SCHEMA_VERSION {
            return bad(
                "schema_version",
                &format!(
                    "unsupported version {} (expected {SCHEMA_VERSION})",
                    self.schema_version
                ),
            );
        }
        if self.name.is_empty() || self.name.contains(['/', '\\']) {
            return bad("name", "must be a non-empty plain name");
        }
        let trains = self.dataset.is_some();
        if !trains && self.theory.is_empty() && self.quadratic.is_none() {
            return bad(
                "dataset",
                "nothing to run: give a dataset, theory cases or a quadratic problem",
            );
        }
        if trains {
            if self.optimizers.is_empty() {
                return bad("optimizer", "a dataset needs at least one optimizer");
            }
            if self.train.is_none() {
                return bad("train", "a dataset needs a train section");
            }
        } else if !self.optimizers.is_empty() {
            return bad("dataset", "optimizers given without a dataset");
        }
        let mut labels = std::collections::BTreeSet::new();
        for (i, o) in self.optimizers.iter().enumerate() {
            let label = o.label();
            if label.is_empty() || label.contains(['/', '\\']) || label == "dataset" {
                return bad(
                    &format!("optimizer[{i}].label"),
                    "must be a plain name other than `dataset`",
                );
            }
            if !labels.insert(label.clone()) {
                return bad(&format!("optimizer[{i}].label"), &format!("duplicate label `{label}`"));
            }
            if let Some(a) = o.alpha {
                if !(a.is_finite() && a >= 0.0) {
                    return bad(&format!("optimizer[{i}].alpha"), "must be finite and non-negative");
                }
            }
            if !(0.0..1.0).contains(&o.beta) {
                return bad(&format!("optimizer[{i}].beta"), "must lie in [0, 1)");
            }
        }
        if self.optimizers.iter().any(|o| o.alpha.is_none()) {
            if self.grid.exponents.is_empty() {
                return bad("grid.exponents", "empty grid");
            }
            if self.grid.seeds.is_empty() {
                return bad("grid.seeds", "need at least one seed");
            }
        }
        if let Some(t) = &self.train {
            match &t.checkpoints {
                CheckpointSpec::Every { every: 0 } => return bad("train.checkpoints.every", "must be positive"),
                CheckpointSpec::Log { per_decade: 0 } => {
                    return bad("train.checkpoints.per_decade", "must be positive")
                }
                CheckpointSpec::List { steps } if steps.iter().any(|&s| s > t.steps) => {
                    return bad("train.checkpoints.steps", "checkpoint beyond the step budget")
                }
                _ => {}
            }
        }
        if self.analysis.groups == 0 {
            return bad("analysis.groups", "must be positive");
        }
        for (i, case) in self.theory.iter().enumerate() {
            if case.rows == 0 {
                return bad(&format!("theory[{i}].rows"), "must be positive");
            }
        }
        Ok(())
    }

    pub fn checkpoint_steps(&self) -> Vec<usize> {
        let Some(t) = &self.train else { return Vec::new() };
        match &t.checkpoints {
            CheckpointSpec::Every { every } => imblab_core::optim::checkpoints_every(t.steps, *every),
            CheckpointSpec::Log { per_decade } => imblab_core::optim::checkpoints_log(t.steps, *per_decade),
            CheckpointSpec::List { steps } => steps.clone(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const FULL: &str = r#"
schema_version = 1
name = "demo"
out_dir = "out/demo"

[dataset]
kind = "heavy_tailed"
m = 4
seed = 3
distribution = { kind = "gaussian", mean = 0.5 }

[model]
bias = false
init = { kind = "gaussian", sigma = 0.1, seed = 9 }

[[optimizer]]
family = "gd"
alpha = 0.5
beta = 0.9
reweight = "inv_sqrt_freq"

[[optimizer]]
label = "adam-mb"
family = "adam"
batch = { kind = "minibatch", size = 16 }
adam = { beta1 = 0.8, beta2 = 0.99, eps = 1e-6 }

[grid]
exponents = [-3, -2]
seeds = [1, 2]

[train]
steps = 20
checkpoints = { kind = "every", every = 5 }

[analysis]
groups = 3
heatmap = { classes = 4, dims = 3, sampling = "log_uniform", seed = 2 }

[[theory]]
c = 10
pi = 0.1
t_max = 5.0

[quadratic]
pi = [1.0, 0.1]
alpha = 0.5
steps = 10
"#;

    #[test]
    fn round_trips_through_toml_and_json() {
        let cfg = ExperimentConfig::from_toml(FULL).unwrap();
        assert_eq!(cfg.optimizers[1].label(), "adam-mb");
        assert_eq!(cfg.optimizers[0].label(), "gd");
        assert_eq!(ExperimentConfig::from_toml(&cfg.to_toml()).unwrap(), cfg);
        assert_eq!(ExperimentConfig::from_json(&cfg.to_json()).unwrap(), cfg);
    }

    #[test]
    fn unknown_field_is_named() {
        let text = FULL.replace("beta = 0.9", "betta = 0.9");
        match ExperimentConfig::from_toml(&text) {
            Err(CliError::Config { field, .. }) => assert_eq!(field, "optimizer[0].betta"),
            other => panic!("{other:?}"),
        }
        let text = FULL.replace("m = 4", "m = \"four\"");
        match ExperimentConfig::from_toml(&text) {
            // tagged enums are buffered, so the path stops at the table
            Err(CliError::Config { field, message }) => {
                assert_eq!(field, "dataset");
                assert!(message.contains("four"), "{message}");
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn semantic_checks() {
        let err = |t: &str| match ExperimentConfig::from_toml(t) {
            Err(CliError::Config { field, .. }) => field,
            other => panic!("{other:?}"),
        };
        assert_eq!(
            err(&FULL.replace("schema_version = 1", "schema_version = 7")),
            "schema_version"
        );
        assert_eq!(err(&FULL.replace("beta = 0.9", "beta = 1.0")), "optimizer[0].beta");
        assert_eq!(
            err(&FULL.replace("label = \"adam-mb\"", "label = \"gd\"")),
            "optimizer[1].label"
        );
        assert_eq!(err(&FULL.replace("every = 5", "every = 0")), "train.checkpoints.every");
        assert_eq!(err("schema_version = 1\nname = \"x\"\n"), "dataset");
    }
}
