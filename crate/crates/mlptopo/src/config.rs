//! Run configuration, read from TOML. See `docs/run-config.schema.json`.
//!
//! A relative table path in a file is taken relative to that file.

use std::path::{Path, PathBuf};

use mlptopo_core::dataset::ClassGrouping;
use mlptopo_core::mlp::{Activation, TrainConfig};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::table::{TableSpec, CARDIOTOCOGRAPHY_FEATURES};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub dataset: DatasetSpec,
    pub model: ModelSpec,
    pub train: TrainSpec,
    pub analysis: AnalysisSpec,
    #[serde(default)]
    pub expect: Expectations,
    pub output_dir: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum DatasetSpec {
    Circles(CirclesSpec),
    Table(TableConfig),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CirclesSpec {
    pub n_per_class: usize,
    pub r_inner: f64,
    pub r_outer: f64,
    pub noise_std: f64,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TableConfig {
    pub path: PathBuf,
    pub label_column: String,
    #[serde(default)]
    pub feature_columns: Vec<String>,
    #[serde(default)]
    pub exclude: Vec<String>,
    pub class0: Vec<String>,
    pub class1: Vec<String>,
    #[serde(default)]
    pub drop: Vec<String>,
    #[serde(default = "yes")]
    pub normalize: bool,
}

fn yes() -> bool {
    true
}

impl TableConfig {
    pub fn table_spec(&self) -> TableSpec {
        let mut grouping = ClassGrouping::new();
        for raw in &self.class0 {
            grouping = grouping.assign(raw, 0);
        }
        for raw in &self.class1 {
            grouping = grouping.assign(raw, 1);
        }
        for raw in &self.drop {
            grouping = grouping.drop_label(raw);
        }
        TableSpec {
            label_column: self.label_column.clone(),
            feature_columns: self.feature_columns.clone(),
            exclude: self.exclude.clone(),
            grouping,
            normalize: self.normalize,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSpec {
    pub layers: Vec<usize>,
    pub activation: String,
}

impl ModelSpec {
    pub fn activation(&self) -> Result<Activation> {
        Ok(self.activation.parse()?)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrainSpec {
    pub epochs: usize,
    pub learning_rate: f64,
    #[serde(default = "beta1")]
    pub beta1: f64,
    #[serde(default = "beta2")]
    pub beta2: f64,
    #[serde(default = "adam_eps")]
    pub adam_eps: f64,
    /// Initialisation seeds tried in order until one reaches the target.
    pub seeds: Vec<u64>,
    #[serde(default = "one")]
    pub target_accuracy: f64,
}

fn beta1() -> f64 {
    TrainConfig::default().adam_beta1
}
fn beta2() -> f64 {
    TrainConfig::default().adam_beta2
}
fn adam_eps() -> f64 {
    TrainConfig::default().adam_eps
}
fn one() -> f64 {
    1.0
}

impl TrainSpec {
    pub fn train_config(&self) -> TrainConfig {
        TrainConfig {
            epochs: self.epochs,
            learning_rate: self.learning_rate,
            adam_beta1: self.beta1,
            adam_beta2: self.beta2,
            adam_eps: self.adam_eps,
            seed: self.seeds.first().copied().unwrap_or(0),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnalysisSpec {
    /// One scale per layer, input first, output cover scale last.
    pub schedule: Vec<f64>,
    pub max_dim: usize,
    #[serde(default)]
    pub sparsify_min_sq_dist: f64,
    /// Largest Rips scale per layer; absent means the full filtration.
    #[serde(default)]
    pub layer_max_eps: Option<Vec<f64>>,
    #[serde(default = "two")]
    pub top_trajectories: usize,
}

fn two() -> usize {
    2
}

impl AnalysisSpec {
    pub fn layer_caps(&self, layers: usize) -> Vec<f64> {
        self.layer_max_eps.clone().unwrap_or_else(|| vec![f64::INFINITY; layers])
    }
}

/// Checks reported in the run summary. Unset entries are not checked.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Expectations {
    /// `[count, threshold]`: exactly `count` input-layer H1 features with
    /// persistence above `threshold`.
    pub input_h1_prominent: Option<(usize, f64)>,
    /// Exact number of H0 classes that reach the output layer.
    pub essential_h0: Option<usize>,
    /// Minimum fraction of points on the top trajectories.
    pub dominant_coverage: Option<f64>,
    /// Minimum purity of each top trajectory.
    pub dominant_purity: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Preset {
    Circles,
    Cardiotocography,
}

impl Preset {
    pub fn config(self) -> RunConfig {
        match self {
            Preset::Circles => circles(),
            Preset::Cardiotocography => cardiotocography(),
        }
    }
}

pub fn circles() -> RunConfig {
    RunConfig {
        dataset: DatasetSpec::Circles(CirclesSpec { n_per_class: 150, r_inner: 0.5, r_outer: 1.0, noise_std: 0.05, seed: 7 }),
        model: ModelSpec { layers: vec![2, 3, 1], activation: "sigmoid".into() },
        train: TrainSpec {
            epochs: 1000,
            learning_rate: 0.05,
            beta1: beta1(),
            beta2: beta2(),
            adam_eps: adam_eps(),
            seeds: (0..10).collect(),
            target_accuracy: 1.0,
        },
        analysis: AnalysisSpec {
            schedule: vec![0.5, 0.4, 0.2],
            max_dim: 2,
            sparsify_min_sq_dist: 0.0,
            layer_max_eps: None,
            top_trajectories: 2,
        },
        expect: Expectations {
            input_h1_prominent: Some((2, 0.2)),
            essential_h0: Some(2),
            dominant_coverage: Some(0.95),
            dominant_purity: None,
        },
        output_dir: "runs/circles".into(),
    }
}

pub fn cardiotocography() -> RunConfig {
    RunConfig {
        dataset: DatasetSpec::Table(TableConfig {
            path: "data/CTG.csv".into(),
            label_column: "CLASS".into(),
            feature_columns: CARDIOTOCOGRAPHY_FEATURES.iter().map(|s| s.to_string()).collect(),
            exclude: vec![],
            class0: (1..=4).map(|c| c.to_string()).collect(),
            class1: (7..=10).map(|c| c.to_string()).collect(),
            drop: vec!["5".into(), "6".into()],
            normalize: true,
        }),
        model: ModelSpec { layers: vec![21, 32, 1], activation: "sigmoid".into() },
        train: TrainSpec {
            epochs: 5000,
            learning_rate: 1e-3,
            beta1: beta1(),
            beta2: beta2(),
            adam_eps: adam_eps(),
            seeds: (0..10).collect(),
            target_accuracy: 0.9,
        },
        analysis: AnalysisSpec {
            schedule: vec![1.0, 2.5, 0.2],
            max_dim: 2,
            sparsify_min_sq_dist: 0.05,
            layer_max_eps: None,
            top_trajectories: 2,
        },
        expect: Expectations {
            input_h1_prominent: None,
            essential_h0: None,
            dominant_coverage: None,
            dominant_purity: Some(0.95),
        },
        output_dir: "runs/cardiotocography".into(),
    }
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let config: RunConfig = toml::from_str(text).map_err(|e| Error::config(e.message()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::artifact(path, e))?;
        let mut config = toml::from_str::<RunConfig>(&text)
            .map_err(|e| Error::config(format!("{}: {}", path.display(), e.message())))?;
        if let (DatasetSpec::Table(t), Some(dir)) = (&mut config.dataset, path.parent()) {
            if t.path.is_relative() {
                t.path = dir.join(&t.path);
            }
        }
        Ok(config)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("run config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        let layers = &self.model.layers;
        if layers.len() < 2 || layers.contains(&0) {
            return Err(Error::config("model.layers needs at least two positive widths"));
        }
        if layers.last() != Some(&1) {
            return Err(Error::config("the output layer must have width 1"));
        }
        self.model.activation()?;
        if self.analysis.schedule.len() != layers.len() {
            return Err(Error::config(format!(
                "schedule has {} scales but the model has {} layers",
                self.analysis.schedule.len(),
                layers.len()
            )));
        }
        if self.analysis.schedule.iter().any(|e| !(e.is_finite() && *e >= 0.0)) {
            return Err(Error::config("schedule scales must be finite and nonnegative"));
        }
        if !(self.analysis.sparsify_min_sq_dist >= 0.0 && self.analysis.sparsify_min_sq_dist.is_finite()) {
            return Err(Error::config("sparsify_min_sq_dist must be finite and nonnegative"));
        }
        if let Some(caps) = &self.analysis.layer_max_eps {
            if caps.len() != layers.len() {
                return Err(Error::config("layer_max_eps needs one value per layer"));
            }
            if caps.iter().any(|c| c.is_nan() || *c < 0.0) {
                return Err(Error::config("layer_max_eps values must be nonnegative"));
            }
        }
        if self.train.seeds.is_empty() {
            return Err(Error::config("train.seeds is empty"));
        }
        if !(0.0..=1.0).contains(&self.train.target_accuracy) {
            return Err(Error::config("train.target_accuracy must lie in [0, 1]"));
        }
        self.train.train_config().validate()?;
        match &self.dataset {
            DatasetSpec::Circles(c) => {
                if c.n_per_class == 0 || !(c.r_inner > 0.0 && c.r_inner < c.r_outer) || !(c.noise_std >= 0.0) {
                    return Err(Error::config("circles need n_per_class > 0, 0 < r_inner < r_outer, noise_std >= 0"));
                }
                if layers[0] != 2 {
                    return Err(Error::config("circles are 2-dimensional but model.layers[0] differs"));
                }
            }
            DatasetSpec::Table(t) => {
                if !t.feature_columns.is_empty() && t.feature_columns.len() != layers[0] {
                    return Err(Error::config("feature_columns and model.layers[0] disagree"));
                }
            }
        }
        Ok(())
    }
}

/// Command-line values that replace configuration entries when given.
#[derive(Debug, Clone, Default, clap::Args)]
pub struct Overrides {
    /// Dataset seed (circles).
    #[arg(long)]
    pub data_seed: Option<u64>,
    #[arg(long)]
    pub n_per_class: Option<usize>,
    #[arg(long)]
    pub noise_std: Option<f64>,
    /// Table file (table datasets).
    #[arg(long)]
    pub table: Option<PathBuf>,
    /// Layer widths, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub layers: Option<Vec<usize>>,
    #[arg(long)]
    pub activation: Option<String>,
    #[arg(long)]
    pub epochs: Option<usize>,
    #[arg(long)]
    pub lr: Option<f64>,
    /// Initialisation seeds, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub seeds: Option<Vec<u64>>,
    #[arg(long)]
    pub target_accuracy: Option<f64>,
    /// Scales per layer, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub schedule: Option<Vec<f64>>,
    #[arg(long)]
    pub max_dim: Option<usize>,
    #[arg(long)]
    pub sparsify: Option<f64>,
    /// Largest Rips scale per layer, comma separated (`inf` allowed).
    #[arg(long, value_delimiter = ',', value_parser = parse_scale)]
    pub layer_max_eps: Option<Vec<f64>>,
    #[arg(long)]
    pub top: Option<usize>,
    #[arg(long)]
    pub output_dir: Option<PathBuf>,
}

fn parse_scale(s: &str) -> std::result::Result<f64, String> {
    crate::formats::parse_value(s)
}

impl Overrides {
    pub fn apply(&self, c: &mut RunConfig) -> Result<()> {
        match &mut c.dataset {
            DatasetSpec::Circles(d) => {
                set(&mut d.seed, self.data_seed);
                set(&mut d.n_per_class, self.n_per_class);
                set(&mut d.noise_std, self.noise_std);
                if self.table.is_some() {
                    return Err(Error::config("--table given for a circles dataset"));
                }
            }
            DatasetSpec::Table(t) => {
                set(&mut t.path, self.table.clone());
                if self.data_seed.is_some() || self.n_per_class.is_some() || self.noise_std.is_some() {
                    return Err(Error::config("circle options given for a table dataset"));
                }
            }
        }
        set(&mut c.model.layers, self.layers.clone());
        set(&mut c.model.activation, self.activation.clone());
        set(&mut c.train.epochs, self.epochs);
        set(&mut c.train.learning_rate, self.lr);
        set(&mut c.train.seeds, self.seeds.clone());
        set(&mut c.train.target_accuracy, self.target_accuracy);
        set(&mut c.analysis.schedule, self.schedule.clone());
        set(&mut c.analysis.max_dim, self.max_dim);
        set(&mut c.analysis.sparsify_min_sq_dist, self.sparsify);
        if let Some(caps) = &self.layer_max_eps {
            c.analysis.layer_max_eps = Some(caps.clone());
        }
        set(&mut c.analysis.top_trajectories, self.top);
        set(&mut c.output_dir, self.output_dir.clone());
        Ok(())
    }
}

fn set<T>(slot: &mut T, value: Option<T>) {
    if let Some(v) = value {
        *slot = v;
    }
}

/// Preset, then file, then flags; the result is validated.
pub fn resolve(preset: Option<Preset>, file: Option<&Path>, overrides: &Overrides) -> Result<RunConfig> {
    let mut config = match (file, preset) {
        (Some(path), _) => RunConfig::load(path)?,
        (None, Some(p)) => p.config(),
        (None, None) => circles(),
    };
    overrides.apply(&mut config)?;
    config.validate()?;
    Ok(config)
}
