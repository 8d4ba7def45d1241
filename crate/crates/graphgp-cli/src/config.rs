//! Experiment configuration: a single JSON document describing the graph
//! ensemble, kernel, noise levels, data-density grid, replicate counts and
//! the predictors to run. Validation reports the offending field path.

use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use graphgp::graph::EnsembleSpec;
use graphgp::kernel::{KernelSpec, Normalisation};

#[derive(Debug)]
pub struct ConfigError {
    pub field: String,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "config field `{}`: {}", self.field, self.message)
    }
}

impl std::error::Error for ConfigError {}

fn err(field: &str, message: impl Into<String>) -> ConfigError {
    ConfigError { field: field.into(), message: message.into() }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum EnsembleConfig {
    Regular { d: usize },
    ErdosRenyi { mean_degree: f64 },
    GrgPowerlaw { exponent: f64, cutoff: f64 },
}

impl EnsembleConfig {
    pub fn to_spec(&self) -> EnsembleSpec {
        match *self {
            EnsembleConfig::Regular { d } => EnsembleSpec::Regular { d },
            EnsembleConfig::ErdosRenyi { mean_degree } => EnsembleSpec::ErdosRenyi { mean_degree },
            EnsembleConfig::GrgPowerlaw { exponent, cutoff } => {
                EnsembleSpec::GrgPowerlaw { exponent, cutoff }
            }
        }
    }

    pub fn regular_degree(&self) -> Option<usize> {
        match *self {
            EnsembleConfig::Regular { d } => Some(d),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq)]
#[serde(rename_all = "snake_case")]
pub enum NormalisationConfig {
    Raw,
    Global,
    Local,
}

impl NormalisationConfig {
    pub fn to_mode(self, c: f64) -> Normalisation {
        match self {
            NormalisationConfig::Raw => Normalisation::Raw,
            NormalisationConfig::Global => Normalisation::Global,
            NormalisationConfig::Local => Normalisation::Local { c },
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct KernelConfig {
    pub a: f64,
    pub p: u32,
    pub normalisation: NormalisationConfig,
    /// Target prior variance for local normalisation.
    #[serde(default = "default_unit")]
    pub c: f64,
}

fn default_unit() -> f64 {
    1.0
}

impl KernelConfig {
    pub fn to_spec(&self) -> KernelSpec {
        KernelSpec { a: self.a, p: self.p, normalisation: self.normalisation.to_mode(self.c) }
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct ReplicatesConfig {
    pub graphs: usize,
    pub datasets: usize,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq, Eq, Hash)]
#[serde(rename_all = "snake_case")]
pub enum Predictor {
    Simulate,
    Eig,
    EigTree,
    Cavity,
    Master,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct PopulationConfig {
    #[serde(default = "default_pop_size")]
    pub size: usize,
    #[serde(default = "default_burn_in")]
    pub burn_in_sweeps: usize,
    #[serde(default = "default_measure")]
    pub measure_sweeps: usize,
}

fn default_pop_size() -> usize {
    2000
}
fn default_burn_in() -> usize {
    200
}
fn default_measure() -> usize {
    500
}

impl Default for PopulationConfig {
    fn default() -> Self {
        PopulationConfig {
            size: default_pop_size(),
            burn_in_sweeps: default_burn_in(),
            measure_sweeps: default_measure(),
        }
    }
}

impl PopulationConfig {
    pub fn to_params(self) -> graphgp::cavity::PopulationParams {
        graphgp::cavity::PopulationParams {
            size: self.size,
            burn_in_sweeps: self.burn_in_sweeps,
            measure_sweeps: self.measure_sweeps,
            ..Default::default()
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MismatchConfig {
    pub student: NormalisationConfig,
    pub teacher: NormalisationConfig,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TreeKernelConfig {
    /// Branching degree; defaults to the ensemble degree for regular graphs.
    pub d: Option<usize>,
    #[serde(default = "default_p_list")]
    pub p_list: Vec<u32>,
    /// Largest distance row to emit.
    pub l_max: Option<u32>,
}

fn default_p_list() -> Vec<u32> {
    vec![1, 2, 3, 4, 5, 10, 20, 50, 100, 200, 500]
}

impl Default for TreeKernelConfig {
    fn default() -> Self {
        TreeKernelConfig { d: None, p_list: default_p_list(), l_max: None }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub ensemble: EnsembleConfig,
    pub v: usize,
    pub kernel: KernelConfig,
    pub sigma2: Vec<f64>,
    pub nu_grid: Vec<f64>,
    pub replicates: ReplicatesConfig,
    pub predictors: Vec<Predictor>,
    #[serde(default)]
    pub mismatch: Option<MismatchConfig>,
    pub seed: u64,
    #[serde(default)]
    pub out: Option<String>,
    #[serde(default)]
    pub population: PopulationConfig,
    #[serde(default)]
    pub tree_kernel: TreeKernelConfig,
    /// Histogram bins for the distribution exports.
    #[serde(default = "default_bins")]
    pub bins: usize,
}

fn default_bins() -> usize {
    60
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self, String> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| format!("cannot read config {}: {e}", path.display()))?;
        let cfg: ExperimentConfig = serde_json::from_str(&text).map_err(|e| {
            format!(
                "config parse error at line {}, column {}: {e}",
                e.line(),
                e.column()
            )
        })?;
        cfg.validate().map_err(|e| e.to_string())?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.v == 0 {
            return Err(err("v", "vertex count must be >= 1"));
        }
        match self.ensemble {
            EnsembleConfig::Regular { d } => {
                if d >= self.v {
                    return Err(err("ensemble.d", "degree must be below the vertex count"));
                }
            }
            EnsembleConfig::ErdosRenyi { mean_degree } => {
                if !(mean_degree >= 0.0) || !mean_degree.is_finite() {
                    return Err(err("ensemble.mean_degree", "must be finite and >= 0"));
                }
            }
            EnsembleConfig::GrgPowerlaw { exponent, cutoff } => {
                if !(exponent > 2.0) {
                    return Err(err("ensemble.exponent", "must be > 2 for a finite mean"));
                }
                if !(cutoff > 0.0) {
                    return Err(err("ensemble.cutoff", "must be > 0"));
                }
            }
        }
        if !(self.kernel.a >= 2.0) || !self.kernel.a.is_finite() {
            return Err(err("kernel.a", "must be >= 2"));
        }
        if self.kernel.normalisation == NormalisationConfig::Local && !(self.kernel.c > 0.0) {
            return Err(err("kernel.c", "local target variance must be > 0"));
        }
        if self.sigma2.is_empty() {
            return Err(err("sigma2", "need at least one noise level"));
        }
        for (i, &s) in self.sigma2.iter().enumerate() {
            if !(s > 0.0) || !s.is_finite() {
                return Err(err(&format!("sigma2[{i}]"), "must be finite and > 0"));
            }
        }
        if self.nu_grid.is_empty() {
            return Err(err("nu_grid", "need at least one data density"));
        }
        for (i, &nu) in self.nu_grid.iter().enumerate() {
            if !(nu >= 0.0) || !nu.is_finite() {
                return Err(err(&format!("nu_grid[{i}]"), "must be finite and >= 0"));
            }
        }
        if self.replicates.graphs == 0 || self.replicates.datasets == 0 {
            return Err(err("replicates", "graph and dataset counts must be >= 1"));
        }
        if self.predictors.is_empty() {
            return Err(err("predictors", "need at least one predictor"));
        }
        let needs_regular = [Predictor::EigTree, Predictor::Master];
        for p in &self.predictors {
            if needs_regular.contains(p) && self.ensemble.regular_degree().is_none() {
                return Err(err(
                    "predictors",
                    format!("{p:?} requires a regular ensemble"),
                ));
            }
            if needs_regular.contains(p) {
                let d = self.ensemble.regular_degree().unwrap();
                if d < 3 {
                    return Err(err("ensemble.d", "tree spectra need degree >= 3"));
                }
            }
        }
        if let Some(m) = &self.mismatch {
            if m.student == m.teacher {
                return Err(err(
                    "mismatch",
                    "student and teacher normalisations are identical; use `simulate`",
                ));
            }
        }
        if self.population.size == 0 {
            return Err(err("population.size", "must be >= 1"));
        }
        if self.bins == 0 {
            return Err(err("bins", "must be >= 1"));
        }
        if let Some(d) = self.tree_kernel.d {
            if d < 2 {
                return Err(err("tree_kernel.d", "branching degree must be >= 2"));
            }
        }
        if self.tree_kernel.p_list.is_empty() {
            return Err(err("tree_kernel.p_list", "need at least one walk length"));
        }
        Ok(())
    }
}
