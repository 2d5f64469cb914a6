//! Benchmark configuration, read from TOML or an equivalent JSON document.
//!
//! ```toml
//! dim = 256
//! budget = 3000
//! population = 40
//! noise_levels = [0.0, 0.2, 0.5]
//! repetitions = 5
//! master_seed = 1
//!
//! [landscapes]
//! objective = "quadric"
//! profiles = ["shallow", "mid", "deep"]
//!
//! [[optimizers]]
//! kind = "cholesky-cma"
//!
//! [[optimizers]]
//! kind = "sphere-cma"
//! name = "sphere-inv"
//! params = { schedule = { kind = "inverse", mu0 = 0.4, mu_min = 0.0, tau = 10.0 } }
//! ```

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

use super::HarnessError;
use crate::objectives::{DepthProfile, LandscapeParams};
use crate::optimizers::{
    AskTellOptimizer, CholeskyCma, CholeskyConfig, DiagonalCma, DiagonalConfig, GaParams,
    GeneticAlgorithm, OptimizerKind, RandomSearch, RandomSearchConfig, SphereCma, SphereConfig,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum ObjectiveSpec {
    /// Synthetic quadric landscapes.
    #[default]
    Quadric,
    /// Scores are iid standard normal draws.
    NoiseOnly,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SuiteSpec {
    pub objective: ObjectiveSpec,
    pub profiles: Vec<DepthProfile>,
    /// Landscapes generated per profile.
    pub per_profile: usize,
    pub params: LandscapeParams,
}

impl Default for SuiteSpec {
    fn default() -> Self {
        Self {
            objective: ObjectiveSpec::Quadric,
            profiles: DepthProfile::ALL.to_vec(),
            per_profile: 1,
            params: LandscapeParams::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OptimizerSpec {
    pub kind: OptimizerKind,
    /// Label in records and tables; defaults to the kind.
    #[serde(default)]
    pub name: Option<String>,
    /// Optimizer-specific settings; see the optimizer config types.
    #[serde(default)]
    pub params: Value,
}

impl OptimizerSpec {
    pub fn new(kind: OptimizerKind) -> Self {
        Self {
            kind,
            name: None,
            params: Value::Null,
        }
    }

    pub fn named(kind: OptimizerKind, name: &str, params: Value) -> Self {
        Self {
            kind,
            name: Some(name.to_string()),
            params,
        }
    }

    pub fn label(&self) -> String {
        self.name.clone().unwrap_or_else(|| self.kind.to_string())
    }

    /// Fill in the run-level population (and run length for SphereCMA).
    fn params_with(&self, population: usize, generations: usize) -> Result<Value, HarnessError> {
        let mut params = match &self.params {
            Value::Null => serde_json::Map::new(),
            Value::Object(m) => m.clone(),
            other => {
                return Err(HarnessError::Config(format!(
                    "{}: params must be a table, got {other}",
                    self.label()
                )))
            }
        };
        match params.get("population") {
            Some(p) if p.as_u64() != Some(population as u64) => {
                return Err(HarnessError::Config(format!(
                    "{}: population {p} differs from the run population {population}",
                    self.label()
                )))
            }
            _ => {
                params.insert("population".into(), population.into());
            }
        }
        if self.kind == OptimizerKind::SphereCma && !params.contains_key("generations") {
            params.insert("generations".into(), generations.into());
        }
        Ok(Value::Object(params))
    }

    pub fn build(
        &self,
        dim: usize,
        population: usize,
        generations: usize,
        seed: u64,
    ) -> Result<Box<dyn AskTellOptimizer>, HarnessError> {
        let params = self.params_with(population, generations)?;
        let bad = |e: serde_json::Error| HarnessError::Config(format!("{}: {e}", self.label()));
        Ok(match self.kind {
            OptimizerKind::SphereCma => {
                let cfg: SphereConfig = serde_json::from_value(params).map_err(bad)?;
                Box::new(SphereCma::new(dim, &cfg, seed)?)
            }
            OptimizerKind::CholeskyCma => {
                let cfg: CholeskyConfig = serde_json::from_value(params).map_err(bad)?;
                Box::new(CholeskyCma::new(dim, &cfg, seed)?)
            }
            OptimizerKind::DiagonalCma => {
                let cfg: DiagonalConfig = serde_json::from_value(params).map_err(bad)?;
                Box::new(DiagonalCma::new(dim, &cfg, seed)?)
            }
            OptimizerKind::Ga => {
                let cfg: GaParams = serde_json::from_value(params).map_err(bad)?;
                Box::new(GeneticAlgorithm::new(dim, &cfg, seed)?)
            }
            OptimizerKind::RandomSearch => {
                let cfg: RandomSearchConfig = serde_json::from_value(params).map_err(bad)?;
                Box::new(RandomSearch::new(dim, &cfg, seed)?)
            }
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BenchmarkConfig {
    pub dim: usize,
    /// Objective evaluations per run; must be a multiple of `population`.
    pub budget: usize,
    pub population: usize,
    pub optimizers: Vec<OptimizerSpec>,
    pub landscapes: SuiteSpec,
    pub noise_levels: Vec<f64>,
    pub repetitions: usize,
    pub master_seed: u64,
    pub output_dir: Option<PathBuf>,
}

impl Default for BenchmarkConfig {
    /// The desk-scale profile: d = 256, B = 40, T = 75, three landscapes,
    /// three noise levels, five repetitions.
    fn default() -> Self {
        Self {
            dim: 256,
            budget: 3000,
            population: 40,
            optimizers: vec![
                OptimizerSpec::named(OptimizerKind::SphereCma, "sphere-exp", Value::Null),
                OptimizerSpec::named(
                    OptimizerKind::SphereCma,
                    "sphere-inv",
                    serde_json::json!({ "schedule": { "kind": "inverse", "mu0": 0.4, "mu_min": 0.0, "tau": 10.0 } }),
                ),
                OptimizerSpec::new(OptimizerKind::CholeskyCma),
                OptimizerSpec::new(OptimizerKind::DiagonalCma),
                OptimizerSpec::new(OptimizerKind::Ga),
                OptimizerSpec::new(OptimizerKind::RandomSearch),
            ],
            landscapes: SuiteSpec::default(),
            noise_levels: vec![0.0, 0.2, 0.5],
            repetitions: 5,
            master_seed: 0,
            output_dir: None,
        }
    }
}

impl BenchmarkConfig {
    pub fn from_toml(text: &str) -> Result<Self, HarnessError> {
        let cfg: Self = toml::from_str(text).map_err(|e| HarnessError::Config(e.to_string()))?;
        cfg.validated()
    }

    pub fn from_json(text: &str) -> Result<Self, HarnessError> {
        let cfg: Self =
            serde_json::from_str(text).map_err(|e| HarnessError::Config(e.to_string()))?;
        cfg.validated()
    }

    /// Read a `.json` file as JSON and anything else as TOML.
    pub fn load(path: &Path) -> Result<Self, HarnessError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| HarnessError::Config(format!("cannot read {}: {e}", path.display())))?;
        if path.extension().is_some_and(|e| e == "json") {
            Self::from_json(&text)
        } else {
            Self::from_toml(&text)
        }
    }

    pub fn generations(&self) -> usize {
        self.budget / self.population
    }

    pub fn validated(self) -> Result<Self, HarnessError> {
        let bad = |m: String| Err(HarnessError::Config(m));
        if self.dim == 0 || self.population < 2 {
            return bad("dim must be >= 1 and population >= 2".into());
        }
        if self.budget == 0 || self.budget % self.population != 0 {
            return bad(format!(
                "budget {} is not a positive multiple of population {}",
                self.budget, self.population
            ));
        }
        if self.repetitions == 0 {
            return bad("repetitions must be >= 1".into());
        }
        if self.optimizers.is_empty() {
            return bad("no optimizers configured".into());
        }
        if self.noise_levels.is_empty()
            || self
                .noise_levels
                .iter()
                .any(|a| !(*a >= 0.0 && a.is_finite()))
        {
            return bad("noise levels must be a non-empty list of finite values >= 0".into());
        }
        let mut names = BTreeSet::new();
        for o in &self.optimizers {
            if !names.insert(o.label()) {
                return bad(format!("duplicate optimizer name {:?}", o.label()));
            }
            // surface parameter errors before any run starts
            o.build(self.dim, self.population, self.generations(), 0)?;
        }
        if self.landscapes.objective == ObjectiveSpec::Quadric {
            if self.landscapes.profiles.is_empty() || self.landscapes.per_profile == 0 {
                return bad("quadric suite needs at least one profile and per_profile >= 1".into());
            }
            if self.dim < 16 {
                return bad("quadric landscapes need dim >= 16".into());
            }
        }
        Ok(self)
    }

    /// Content hash of the canonical JSON form, so TOML and JSON spellings
    /// of the same configuration agree. The output directory is excluded.
    pub fn fingerprint(&self) -> String {
        let mut canon = self.clone();
        canon.output_dir = None;
        let json = serde_json::to_string(&canon).expect("config serializes");
        let digest = Sha256::digest(json.as_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }
}
