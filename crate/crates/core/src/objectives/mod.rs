//! Objectives: the multiplicative noise model, synthetic quadric
//! landscapes, pure-noise controls, score normalization and external
//! objectives over a line-delimited JSON protocol.
//!
//! Every evaluation returns a [`ScoreRecord`] carrying the raw response, the
//! noisy score the optimizer sees and the noise-free clean score used for
//! reporting.

use std::collections::BTreeMap;

use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub mod external;
mod landscape;

pub use external::{ChildTransport, ExternalObjective, LoopbackTransport, PeerMode, Transport};
pub use landscape::{make_landscape_suite, DepthProfile, LandscapeParams, QuadricLandscape};

#[derive(Debug, Error)]
pub enum ObjectiveError {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("unit {0} never scored above zero")]
    AllZeroUnit(String),
    #[error("peer did not answer within {0:?}")]
    PeerTimeout(std::time::Duration),
    #[error("protocol error: {0}")]
    ProtocolError(String),
    #[error("peer crashed: {0}")]
    PeerCrash(String),
    #[error("invalid objective: {0}")]
    InvalidSpec(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Noise level and seed of the multiplicative noise model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseSpec {
    pub alpha: f64,
    pub seed: u64,
}

impl NoiseSpec {
    pub const PRESETS: [f64; 3] = [0.0, 0.2, 0.5];

    pub fn new(alpha: f64, seed: u64) -> Result<Self, ObjectiveError> {
        if !(alpha >= 0.0 && alpha.is_finite()) {
            return Err(ObjectiveError::InvalidSpec(format!(
                "noise level {alpha} must be >= 0"
            )));
        }
        Ok(Self { alpha, seed })
    }

    pub fn noiseless() -> Self {
        Self {
            alpha: 0.0,
            seed: 0,
        }
    }

    /// Noisy version of `r` for sample `index` of generation `gen`. Each
    /// (seed, generation, index) triple has its own stream.
    pub fn apply(&self, r: f64, gen: usize, index: usize) -> f64 {
        if self.alpha == 0.0 {
            return noisy_wrap(r, 0.0, 0.0);
        }
        let mut rng = crate::rng::stream(self.seed, &[gen as u64, index as u64]);
        noisy_wrap(r, self.alpha, StandardNormal.sample(&mut rng))
    }
}

/// `max(0, (1 + alpha eps) r)`.
pub fn noisy_wrap(r: f64, alpha: f64, eps: f64) -> f64 {
    ((1.0 + alpha * eps) * r).max(0.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScoreRecord {
    pub raw: f64,
    pub noisy: f64,
    pub clean: f64,
}

pub trait Objective: Send {
    fn dim(&self) -> usize;
    /// Score one batch. `gen` keys the noise streams and the protocol
    /// messages.
    fn evaluate(
        &mut self,
        gen: usize,
        codes: &[Vec<f64>],
    ) -> Result<Vec<ScoreRecord>, ObjectiveError>;
}

pub(crate) fn check_dims(codes: &[Vec<f64>], dim: usize) -> Result<(), ObjectiveError> {
    match codes.iter().find(|c| c.len() != dim) {
        Some(c) => Err(ObjectiveError::DimensionMismatch {
            expected: dim,
            got: c.len(),
        }),
        None => Ok(()),
    }
}

/// A quadric landscape seen through the noise model.
pub struct NoisyQuadric<'a> {
    pub landscape: &'a QuadricLandscape,
    pub noise: NoiseSpec,
}

impl Objective for NoisyQuadric<'_> {
    fn dim(&self) -> usize {
        self.landscape.dim()
    }

    fn evaluate(
        &mut self,
        gen: usize,
        codes: &[Vec<f64>],
    ) -> Result<Vec<ScoreRecord>, ObjectiveError> {
        check_dims(codes, self.dim())?;
        codes
            .iter()
            .enumerate()
            .map(|(i, z)| {
                let raw = self.landscape.eval(z)?;
                Ok(ScoreRecord {
                    raw,
                    noisy: self.noise.apply(raw, gen, i),
                    clean: raw,
                })
            })
            .collect()
    }
}

/// Scores drawn iid from `N(0, 1)` whatever the code. Raw, noisy and clean
/// scores coincide.
pub struct NoiseOnly {
    dim: usize,
    seed: u64,
}

impl NoiseOnly {
    pub fn new(dim: usize, seed: u64) -> Self {
        Self { dim, seed }
    }
}

impl Objective for NoiseOnly {
    fn dim(&self) -> usize {
        self.dim
    }

    fn evaluate(
        &mut self,
        gen: usize,
        codes: &[Vec<f64>],
    ) -> Result<Vec<ScoreRecord>, ObjectiveError> {
        check_dims(codes, self.dim)?;
        let mut rng = crate::rng::stream(self.seed, &[gen as u64]);
        Ok(codes
            .iter()
            .map(|_| {
                let s: f64 = StandardNormal.sample(&mut rng);
                ScoreRecord {
                    raw: s,
                    noisy: s,
                    clean: s,
                }
            })
            .collect())
    }
}

/// Divide each score by the largest score of its unit.
pub fn normalize_unit(scores: &[f64]) -> Option<Vec<f64>> {
    let max = scores.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if !(max > 0.0) || !max.is_finite() {
        return None;
    }
    Some(scores.iter().map(|s| s / max).collect())
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Normalized {
    pub units: BTreeMap<String, Vec<f64>>,
    /// Units left out because no score was positive.
    pub excluded: Vec<String>,
}

impl Normalized {
    pub fn error_for_excluded(&self) -> Option<ObjectiveError> {
        self.excluded
            .first()
            .map(|u| ObjectiveError::AllZeroUnit(u.clone()))
    }
}

/// Per-unit normalization; each unit has its own denominator.
pub fn normalize_scores(units: &BTreeMap<String, Vec<f64>>) -> Normalized {
    let mut out = Normalized::default();
    for (name, scores) in units {
        match normalize_unit(scores) {
            Some(n) => {
                out.units.insert(name.clone(), n);
            }
            None => out.excluded.push(name.clone()),
        }
    }
    out
}
