//! SphereCMA: search on the sphere of radius `R`.
//!
//! Samples sit at a scheduled angle `mu(t)` from the current center along
//! random tangent directions; the center itself is re-evaluated as sample 0.
//! The update moves the center along the great circle towards the
//! rank-weighted mean direction, overshooting by the learning ratio.

use rand::SeedableRng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::snapshot::{SnapReader, SnapWriter};
use super::{AskTellOptimizer, Batch, OptimizerError, OptimizerKind, Phase};
use crate::geometry::{
    default_radius, exp_map, normalize_to, rank_weight, slerp, tangent_project, DecayKind,
    DecaySchedule, GeometryError, SphereParams,
};
use crate::rng::Rng;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SphereConfig {
    pub population: usize,
    pub learning_ratio: f64,
    /// Top-K cutoff; `max(1, B / 2)` when unset.
    pub cutoff: Option<usize>,
    /// Sphere radius; `4.6875 sqrt(d)` when unset.
    pub radius: Option<f64>,
    /// Angular decay; the default exponential schedule for `generations` when unset.
    pub schedule: Option<DecaySchedule>,
    /// Planned run length, used only by the default schedule.
    pub generations: usize,
}

impl Default for SphereConfig {
    fn default() -> Self {
        Self {
            population: 40,
            learning_ratio: 1.5,
            cutoff: None,
            radius: None,
            schedule: None,
            generations: 75,
        }
    }
}

impl SphereConfig {
    pub fn exponential() -> Self {
        Self::default()
    }

    pub fn inverse() -> Self {
        Self {
            schedule: Some(DecaySchedule::default_inverse()),
            ..Self::default()
        }
    }

    pub fn resolve(&self, dim: usize) -> Result<(SphereParams, DecaySchedule), GeometryError> {
        let params = SphereParams {
            radius: self.radius.unwrap_or_else(|| default_radius(dim)),
            dim,
            learning_ratio: self.learning_ratio,
            population: self.population,
            cutoff: self.cutoff.unwrap_or((self.population / 2).max(1)),
        }
        .validated()?;
        let schedule = match self.schedule {
            Some(s) => s.validated()?,
            None => DecaySchedule::default_exponential(self.generations),
        };
        Ok((params, schedule))
    }
}

pub struct SphereCma {
    params: SphereParams,
    schedule: DecaySchedule,
    center: Vec<f64>,
    generation: usize,
    rng: Rng,
    phase: Phase,
}

fn isotropic<R: rand::Rng + ?Sized>(dim: usize, rng: &mut R) -> Vec<f64> {
    (0..dim).map(|_| StandardNormal.sample(rng)).collect()
}

impl SphereCma {
    pub fn new(dim: usize, config: &SphereConfig, seed: u64) -> Result<Self, OptimizerError> {
        let (params, schedule) = config.resolve(dim)?;
        let mut rng = Rng::seed_from_u64(seed);
        let center = normalize_to(&isotropic(dim, &mut rng), params.radius)?;
        Ok(Self {
            params,
            schedule,
            center,
            generation: 0,
            rng,
            phase: Phase::Ready,
        })
    }

    /// Start from a given center; it is rescaled onto the sphere.
    pub fn with_center(
        center: &[f64],
        config: &SphereConfig,
        seed: u64,
    ) -> Result<Self, OptimizerError> {
        let mut s = Self::new(center.len(), config, seed)?;
        s.center = normalize_to(center, s.params.radius)?;
        Ok(s)
    }

    pub fn params(&self) -> &SphereParams {
        &self.params
    }

    pub fn schedule(&self) -> &DecaySchedule {
        &self.schedule
    }

    pub fn center(&self) -> &[f64] {
        &self.center
    }

    /// Angle between the center and the non-center samples of the next batch.
    pub fn current_angle(&self) -> f64 {
        self.schedule.eval(self.generation)
    }

    pub fn from_snapshot(bytes: &[u8]) -> Result<Self, OptimizerError> {
        let mut r = SnapReader::new(bytes);
        let h = r.expect(OptimizerKind::SphereCma)?;
        let params = SphereParams {
            dim: h.dim as usize,
            radius: r.f64()?,
            learning_ratio: r.f64()?,
            population: r.usize()?,
            cutoff: r.usize()?,
        }
        .validated()?;
        let kind = match r.u32()? {
            0 => DecayKind::Exponential,
            1 => DecayKind::Inverse,
            k => return Err(OptimizerError::Snapshot(format!("unknown decay kind {k}"))),
        };
        let schedule = DecaySchedule {
            kind,
            mu0: r.f64()?,
            mu_min: r.f64()?,
            tau: r.f64()?,
        }
        .validated()?;
        let center = r.f64s()?;
        let rng = r.rng()?;
        r.finish()?;
        if center.len() != params.dim {
            return Err(OptimizerError::Snapshot(
                "center length differs from dimension".into(),
            ));
        }
        Ok(Self {
            params,
            schedule,
            center,
            generation: h.generation as usize,
            rng,
            phase: Phase::Ready,
        })
    }
}

impl AskTellOptimizer for SphereCma {
    fn kind(&self) -> OptimizerKind {
        OptimizerKind::SphereCma
    }

    fn dim(&self) -> usize {
        self.params.dim
    }

    fn population(&self) -> usize {
        self.params.population
    }

    fn generation(&self) -> usize {
        self.generation
    }

    fn mean(&self) -> Vec<f64> {
        self.center.clone()
    }

    fn step_size(&self) -> Option<f64> {
        Some(self.current_angle())
    }

    fn ask(&mut self) -> Result<Batch, OptimizerError> {
        self.phase.begin_ask(self.params.population)?;
        let (d, b, r) = (self.params.dim, self.params.population, self.params.radius);
        let mut batch = Vec::with_capacity(b);
        batch.push(self.center.clone());
        if self.generation == 0 {
            for _ in 1..b {
                batch.push(normalize_to(&isotropic(d, &mut self.rng), r)?);
            }
        } else {
            let mu = self.current_angle();
            for _ in 1..b {
                let v = tangent_project(&isotropic(d, &mut self.rng), &self.center)?;
                batch.push(exp_map(&self.center, &v, mu)?);
            }
        }
        Ok(batch)
    }

    fn tell(&mut self, codes: &[Vec<f64>], scores: &[f64]) -> Result<(), OptimizerError> {
        self.phase.check_tell(codes, scores, self.params.dim)?;
        let w = rank_weight(scores, self.params.cutoff)?;
        let mut mw = vec![0.0; self.params.dim];
        for (wi, z) in w.iter().zip(codes) {
            if *wi > 0.0 {
                crate::linalg::axpy(*wi, z, &mut mw);
            }
        }
        let mw = normalize_to(&mw, self.params.radius)?;
        let next = slerp(&self.center, &mw, self.params.learning_ratio)?;
        self.center = normalize_to(&next, self.params.radius)?;
        self.phase = Phase::Ready;
        self.generation += 1;
        Ok(())
    }

    fn snapshot(&self) -> Result<Vec<u8>, OptimizerError> {
        if !self.phase.is_ready() {
            return Err(OptimizerError::ProtocolViolation(
                "snapshot with an outstanding batch",
            ));
        }
        let p = &self.params;
        let mut w = SnapWriter::new(self.kind(), p.dim, self.generation);
        w.f64(p.radius);
        w.f64(p.learning_ratio);
        w.u64(p.population as u64);
        w.u64(p.cutoff as u64);
        w.u32(match self.schedule.kind {
            DecayKind::Exponential => 0,
            DecayKind::Inverse => 1,
        });
        w.f64(self.schedule.mu0);
        w.f64(self.schedule.mu_min);
        w.f64(self.schedule.tau);
        w.f64s(&self.center);
        w.rng(&self.rng);
        Ok(w.finish())
    }
}
