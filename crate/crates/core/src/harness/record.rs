//! Persisted per-run records.

use serde::{Deserialize, Serialize};

use crate::diagnostics::covariance::CovMetrics;
use crate::diagnostics::trajectory::MeanTrajectory;
use crate::optimizers::OptimizerKind;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenerationRecord {
    /// Mean of the codes evaluated in this generation.
    pub mean: Vec<f64>,
    pub step_size: Option<f64>,
    pub raw: Vec<f64>,
    pub noisy: Vec<f64>,
    pub clean: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "state", rename_all = "kebab-case")]
pub enum RunStatus {
    Complete,
    Failed { message: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub run_id: String,
    pub fingerprint: String,
    pub optimizer: String,
    pub kind: OptimizerKind,
    pub landscape: String,
    pub profile: Option<String>,
    pub alpha: f64,
    pub repetition: usize,
    pub seed: u64,
    pub dim: usize,
    pub population: usize,
    pub generations: Vec<GenerationRecord>,
    pub runtime_secs: f64,
    /// Highest clean score over every evaluation of the run; `None` if no
    /// generation completed.
    pub final_clean_best: Option<f64>,
    /// Condition number and distance to identity of the final covariance,
    /// for optimizers that adapt one.
    pub final_covariance: Option<CovMetricsRecord>,
    pub status: RunStatus,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CovMetricsRecord {
    pub kappa: f64,
    pub delta: f64,
}

impl From<CovMetrics> for CovMetricsRecord {
    fn from(m: CovMetrics) -> Self {
        Self {
            kappa: m.kappa,
            delta: m.delta,
        }
    }
}

impl RunRecord {
    pub fn is_complete(&self) -> bool {
        self.status == RunStatus::Complete
    }

    pub fn evaluations(&self) -> usize {
        self.generations.iter().map(|g| g.clean.len()).sum()
    }

    pub fn mean_trajectory(&self) -> MeanTrajectory {
        MeanTrajectory {
            means: self.generations.iter().map(|g| g.mean.clone()).collect(),
            step_sizes: self.generations.iter().map(|g| g.step_size).collect(),
        }
    }
}
