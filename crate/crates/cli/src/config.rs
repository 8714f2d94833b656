//! JSON experiment configuration.
//!
//! ```json
//! {
//!   "instance": {
//!     "inline": { "design": [[2, 0], [2, 0], [0, 1], [0, 1]], "beta": [1, 1], "noise_variance": 1 }
//!   },
//!   "lambdas": [0.5, 1.0, 2.0],
//!   "monte_carlo": { "trials": 100000, "seed": 7, "noise": "gaussian" },
//!   "output": { "csv": "sweep.csv", "plot": "sweep.svg" }
//! }
//! ```
//!
//! `instance` takes exactly one of `inline` or `synthetic`. `lambdas` is an
//! explicit ascending list or `{ "min": .., "max": .., "count": .. }` for a
//! log-spaced grid.

use std::path::{Path, PathBuf};

use ridgepca::risk::{log_spaced, validate_grid};
use ridgepca::{
    build_instance, DMatrix, DVector, NoiseKind, ProblemInstance, SignalKind, SignalSpec,
    SpectrumKind, SpectrumSpec,
};
use serde::Deserialize;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Read {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("cannot parse config: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("invalid config: {0}")]
    Invalid(String),
    #[error("invalid config: {0}")]
    Model(#[from] ridgepca::Error),
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub instance: InstanceSource,
    pub lambdas: LambdaGrid,
    #[serde(default)]
    pub monte_carlo: Option<MonteCarloConfig>,
    #[serde(default)]
    pub output: OutputPaths,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceSource {
    pub inline: Option<InlineInstance>,
    pub synthetic: Option<SyntheticInstance>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InlineInstance {
    /// Row-major design matrix.
    pub design: Vec<Vec<f64>>,
    pub beta: Vec<f64>,
    pub noise_variance: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SyntheticInstance {
    pub spectrum: SpectrumConfig,
    pub signal: SignalConfig,
    pub n: usize,
    pub noise_variance: f64,
    #[serde(default)]
    pub seed: u64,
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SpectrumConfig {
    Flat {
        p: usize,
        #[serde(default = "one")]
        scale: f64,
    },
    PolyDecay {
        p: usize,
        #[serde(default = "one")]
        scale: f64,
        exponent: f64,
    },
    ExpDecay {
        p: usize,
        #[serde(default = "one")]
        scale: f64,
        rate: f64,
    },
    Spiked {
        p: usize,
        #[serde(default = "one")]
        scale: f64,
        spike_count: usize,
        spike_value: f64,
        bulk_value: f64,
    },
}

impl SpectrumConfig {
    pub fn to_spec(&self) -> SpectrumSpec {
        match *self {
            SpectrumConfig::Flat { p, scale } => SpectrumSpec::new(SpectrumKind::Flat, p, scale),
            SpectrumConfig::PolyDecay { p, scale, exponent } => {
                SpectrumSpec::new(SpectrumKind::PolyDecay { exponent }, p, scale)
            }
            SpectrumConfig::ExpDecay { p, scale, rate } => {
                SpectrumSpec::new(SpectrumKind::ExpDecay { rate }, p, scale)
            }
            SpectrumConfig::Spiked {
                p,
                scale,
                spike_count,
                spike_value,
                bulk_value,
            } => SpectrumSpec::new(
                SpectrumKind::Spiked {
                    spike_count,
                    spike_value,
                    bulk_value,
                },
                p,
                scale,
            ),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SignalConfig {
    TopAligned { k: usize, norm: f64 },
    BottomAligned { k: usize, norm: f64 },
    Uniform { norm: f64 },
    Random { seed: u64, norm: f64 },
}

impl SignalConfig {
    pub fn to_spec(&self) -> SignalSpec {
        match *self {
            SignalConfig::TopAligned { k, norm } => SignalSpec::new(SignalKind::TopAligned(k), norm),
            SignalConfig::BottomAligned { k, norm } => {
                SignalSpec::new(SignalKind::BottomAligned(k), norm)
            }
            SignalConfig::Uniform { norm } => SignalSpec::new(SignalKind::Uniform, norm),
            SignalConfig::Random { seed, norm } => SignalSpec::new(SignalKind::Random(seed), norm),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum LambdaGrid {
    List(Vec<f64>),
    LogSpaced { min: f64, max: f64, count: usize },
}

impl LambdaGrid {
    pub fn values(&self) -> Result<Vec<f64>, ConfigError> {
        let values = match self {
            LambdaGrid::List(v) => v.clone(),
            LambdaGrid::LogSpaced { min, max, count } => log_spaced(*min, *max, *count)?,
        };
        validate_grid(&values)?;
        Ok(values)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NoiseKindConfig {
    #[default]
    Gaussian,
    Rademacher,
}

impl From<NoiseKindConfig> for NoiseKind {
    fn from(k: NoiseKindConfig) -> Self {
        match k {
            NoiseKindConfig::Gaussian => NoiseKind::Gaussian,
            NoiseKindConfig::Rademacher => NoiseKind::Rademacher,
        }
    }
}

fn enabled_by_default() -> bool {
    true
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MonteCarloConfig {
    #[serde(default = "enabled_by_default")]
    pub enabled: bool,
    pub trials: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub noise: NoiseKindConfig,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputPaths {
    pub csv: Option<PathBuf>,
    pub plot: Option<PathBuf>,
}

/// A config that has passed validation, with the instance materialized.
#[derive(Debug, Clone)]
pub struct Experiment {
    pub instance: ProblemInstance,
    pub lambdas: Vec<f64>,
    pub monte_carlo: Option<MonteCarloConfig>,
    pub output: OutputPaths,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Read {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_json(&text)
    }

    /// `seed` replaces both the synthesis seed and the Monte Carlo seed.
    pub fn override_seed(&mut self, seed: u64) {
        if let Some(s) = self.instance.synthetic.as_mut() {
            s.seed = seed;
        }
        if let Some(mc) = self.monte_carlo.as_mut() {
            mc.seed = seed;
        }
    }

    pub fn build(&self) -> Result<Experiment, ConfigError> {
        let instance = match (&self.instance.inline, &self.instance.synthetic) {
            (Some(inline), None) => inline.build()?,
            (None, Some(synthetic)) => build_instance(
                &synthetic.spectrum.to_spec(),
                &synthetic.signal.to_spec(),
                synthetic.n,
                synthetic.noise_variance,
                synthetic.seed,
            )?,
            _ => {
                return Err(ConfigError::Invalid(
                    "instance must have exactly one of \"inline\" or \"synthetic\"".into(),
                ))
            }
        };
        let lambdas = self.lambdas.values()?;
        if let Some(mc) = &self.monte_carlo {
            if mc.enabled && mc.trials < 2 {
                return Err(ConfigError::Invalid(format!(
                    "monte_carlo.trials must be at least 2, got {}",
                    mc.trials
                )));
            }
        }
        Ok(Experiment {
            instance,
            lambdas,
            monte_carlo: self.monte_carlo.clone(),
            output: self.output.clone(),
        })
    }
}

impl InlineInstance {
    fn build(&self) -> Result<ProblemInstance, ConfigError> {
        let n = self.design.len();
        let p = self.design.first().map_or(0, Vec::len);
        if n == 0 || p == 0 {
            return Err(ConfigError::Invalid("design must be a nonempty matrix".into()));
        }
        if let Some((i, row)) = self.design.iter().enumerate().find(|(_, r)| r.len() != p) {
            return Err(ConfigError::Invalid(format!(
                "design row {i} has {} entries, expected {p}",
                row.len()
            )));
        }
        let design = DMatrix::from_row_iterator(n, p, self.design.iter().flatten().copied());
        Ok(ProblemInstance::new(
            design,
            DVector::from_column_slice(&self.beta),
            self.noise_variance,
        )?)
    }
}
