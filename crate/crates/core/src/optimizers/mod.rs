//! Ask/tell optimizers.
//!
//! Every optimizer owns its RNG, so a run is a deterministic function of
//! (seed, config, score feedback). `ask` and `tell` must strictly alternate.
//! All optimizers maximize.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::diagnostics::covariance::{cov_metrics, CovMetrics, CovarianceRepr};
use crate::diagnostics::DiagnosticsError;
use crate::geometry::GeometryError;

mod cholesky;
mod diagonal;
pub mod ga;
mod random;
pub mod snapshot;
mod sphere;

pub use cholesky::{CholeskyCma, CholeskyConfig, CholeskyRates};
pub use diagonal::{DiagonalCma, DiagonalConfig, DiagonalRates};
pub use ga::{GaParams, GeneticAlgorithm};
pub use random::{RandomSearch, RandomSearchConfig};
pub use sphere::{SphereCma, SphereConfig};

#[derive(Debug, Error)]
pub enum OptimizerError {
    #[error("protocol violation: {0}")]
    ProtocolViolation(&'static str),
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("non-finite score at index {0}")]
    NonFiniteScore(usize),
    #[error("{0} exposes no adapted covariance")]
    Unsupported(OptimizerKind),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Diagnostics(#[from] DiagnosticsError),
    #[error("snapshot: {0}")]
    Snapshot(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OptimizerKind {
    SphereCma,
    CholeskyCma,
    DiagonalCma,
    Ga,
    RandomSearch,
}

impl OptimizerKind {
    pub fn code(self) -> u32 {
        match self {
            Self::SphereCma => 1,
            Self::CholeskyCma => 2,
            Self::DiagonalCma => 3,
            Self::Ga => 4,
            Self::RandomSearch => 5,
        }
    }

    pub fn from_code(code: u32) -> Option<Self> {
        Some(match code {
            1 => Self::SphereCma,
            2 => Self::CholeskyCma,
            3 => Self::DiagonalCma,
            4 => Self::Ga,
            5 => Self::RandomSearch,
            _ => return None,
        })
    }

    /// Whether the optimizer belongs to the CMA family (for ratio reporting).
    pub fn is_cma_family(self) -> bool {
        matches!(
            self,
            Self::SphereCma | Self::CholeskyCma | Self::DiagonalCma
        )
    }
}

impl std::fmt::Display for OptimizerKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::SphereCma => "sphere-cma",
            Self::CholeskyCma => "cholesky-cma",
            Self::DiagonalCma => "diagonal-cma",
            Self::Ga => "ga",
            Self::RandomSearch => "random-search",
        })
    }
}

pub type Batch = Vec<Vec<f64>>;

pub trait AskTellOptimizer: Send {
    fn kind(&self) -> OptimizerKind;
    fn dim(&self) -> usize;
    fn population(&self) -> usize;
    /// Number of completed `tell` calls.
    fn generation(&self) -> usize;
    /// Current search center (CMA mean, sphere center, GA population mean).
    fn mean(&self) -> Vec<f64>;
    /// Current step size: sigma for the Gaussian optimizers, the angular
    /// step for SphereCMA, `None` for the GA.
    fn step_size(&self) -> Option<f64>;
    fn ask(&mut self) -> Result<Batch, OptimizerError>;
    fn tell(&mut self, codes: &[Vec<f64>], scores: &[f64]) -> Result<(), OptimizerError>;
    /// Exploration covariance shape, for optimizers that adapt one.
    fn covariance(&self) -> Option<CovarianceRepr<'_>> {
        None
    }
    /// Serialize the state between generations. Fails while a batch is
    /// outstanding.
    fn snapshot(&self) -> Result<Vec<u8>, OptimizerError>;
}

/// Condition number and distance-to-identity of the current exploration
/// covariance.
pub fn isotropy_check(opt: &dyn AskTellOptimizer) -> Result<CovMetrics, OptimizerError> {
    let cov = opt
        .covariance()
        .ok_or(OptimizerError::Unsupported(opt.kind()))?;
    Ok(cov_metrics(cov)?)
}

/// Rebuild any optimizer from its snapshot.
pub fn restore(bytes: &[u8]) -> Result<Box<dyn AskTellOptimizer>, OptimizerError> {
    let header = snapshot::peek_header(bytes)?;
    Ok(match header.kind {
        OptimizerKind::SphereCma => Box::new(SphereCma::from_snapshot(bytes)?),
        OptimizerKind::CholeskyCma => Box::new(CholeskyCma::from_snapshot(bytes)?),
        OptimizerKind::DiagonalCma => Box::new(DiagonalCma::from_snapshot(bytes)?),
        OptimizerKind::Ga => Box::new(GeneticAlgorithm::from_snapshot(bytes)?),
        OptimizerKind::RandomSearch => Box::new(RandomSearch::from_snapshot(bytes)?),
    })
}

/// Ask/tell alternation guard shared by the implementations.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Phase {
    Ready,
    Awaiting(usize),
}

impl Phase {
    pub(crate) fn begin_ask(&mut self, batch: usize) -> Result<(), OptimizerError> {
        match self {
            Phase::Ready => {
                *self = Phase::Awaiting(batch);
                Ok(())
            }
            Phase::Awaiting(_) => Err(OptimizerError::ProtocolViolation(
                "ask called twice without tell",
            )),
        }
    }

    /// Validate a tell against the outstanding batch.
    pub(crate) fn check_tell(
        &self,
        codes: &[Vec<f64>],
        scores: &[f64],
        dim: usize,
    ) -> Result<(), OptimizerError> {
        let Phase::Awaiting(n) = *self else {
            return Err(OptimizerError::ProtocolViolation(
                "tell called without a preceding ask",
            ));
        };
        if codes.len() != scores.len() {
            return Err(OptimizerError::ShapeMismatch(format!(
                "{} codes vs {} scores",
                codes.len(),
                scores.len()
            )));
        }
        if codes.len() != n {
            return Err(OptimizerError::ShapeMismatch(format!(
                "expected {n} evaluations, got {}",
                codes.len()
            )));
        }
        if let Some(c) = codes.iter().find(|c| c.len() != dim) {
            return Err(OptimizerError::ShapeMismatch(format!(
                "code of length {} in dimension {dim}",
                c.len()
            )));
        }
        if let Some(i) = scores.iter().position(|s| !s.is_finite()) {
            return Err(OptimizerError::NonFiniteScore(i));
        }
        Ok(())
    }

    pub(crate) fn is_ready(&self) -> bool {
        matches!(self, Phase::Ready)
    }
}

/// Recombination weights and derived constants shared by the CMA variants.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Recombination {
    pub weights: Vec<f64>,
    pub mu_eff: f64,
}

impl Recombination {
    pub(crate) fn new(population: usize) -> Self {
        let mu = (population / 2).max(1);
        let weights = crate::geometry::log_rank_weights(mu);
        let mu_eff = 1.0 / weights.iter().map(|w| w * w).sum::<f64>();
        Self { weights, mu_eff }
    }
}

/// `E||N(0, I_d)||` by the usual series expansion.
pub(crate) fn chi_mean(d: usize) -> f64 {
    let n = d as f64;
    n.sqrt() * (1.0 - 1.0 / (4.0 * n) + 1.0 / (21.0 * n * n))
}
