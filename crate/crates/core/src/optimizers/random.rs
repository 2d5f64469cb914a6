//! Isotropic Gaussian random search. `tell` never changes the proposal
//! distribution; the harness tracks the best code found.

use rand::SeedableRng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::snapshot::{SnapReader, SnapWriter};
use super::{AskTellOptimizer, Batch, OptimizerError, OptimizerKind, Phase};
use crate::rng::Rng;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RandomSearchConfig {
    pub population: usize,
    pub sigma0: f64,
}

impl Default for RandomSearchConfig {
    fn default() -> Self {
        Self {
            population: 40,
            sigma0: 3.0,
        }
    }
}

pub struct RandomSearch {
    dim: usize,
    config: RandomSearchConfig,
    generation: usize,
    rng: Rng,
    phase: Phase,
}

impl RandomSearch {
    pub fn new(dim: usize, config: &RandomSearchConfig, seed: u64) -> Result<Self, OptimizerError> {
        if config.population == 0 || !(config.sigma0 >= 0.0) {
            return Err(OptimizerError::InvalidConfig(
                "need population >= 1 and sigma0 >= 0".into(),
            ));
        }
        Ok(Self {
            dim,
            config: config.clone(),
            generation: 0,
            rng: Rng::seed_from_u64(seed),
            phase: Phase::Ready,
        })
    }

    pub fn from_snapshot(bytes: &[u8]) -> Result<Self, OptimizerError> {
        let mut r = SnapReader::new(bytes);
        let h = r.expect(OptimizerKind::RandomSearch)?;
        let config = RandomSearchConfig {
            population: r.usize()?,
            sigma0: r.f64()?,
        };
        let rng = r.rng()?;
        r.finish()?;
        Ok(Self {
            dim: h.dim as usize,
            config,
            generation: h.generation as usize,
            rng,
            phase: Phase::Ready,
        })
    }
}

impl AskTellOptimizer for RandomSearch {
    fn kind(&self) -> OptimizerKind {
        OptimizerKind::RandomSearch
    }

    fn dim(&self) -> usize {
        self.dim
    }

    fn population(&self) -> usize {
        self.config.population
    }

    fn generation(&self) -> usize {
        self.generation
    }

    fn mean(&self) -> Vec<f64> {
        vec![0.0; self.dim]
    }

    fn step_size(&self) -> Option<f64> {
        Some(self.config.sigma0)
    }

    fn ask(&mut self) -> Result<Batch, OptimizerError> {
        self.phase.begin_ask(self.config.population)?;
        let s = self.config.sigma0;
        Ok((0..self.config.population)
            .map(|_| {
                (0..self.dim)
                    .map(|_| {
                        s * {
                            let x: f64 = StandardNormal.sample(&mut self.rng);
                            x
                        }
                    })
                    .collect()
            })
            .collect())
    }

    fn tell(&mut self, codes: &[Vec<f64>], scores: &[f64]) -> Result<(), OptimizerError> {
        self.phase.check_tell(codes, scores, self.dim)?;
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
        let mut w = SnapWriter::new(self.kind(), self.dim, self.generation);
        w.u64(self.config.population as u64);
        w.f64(self.config.sigma0);
        w.rng(&self.rng);
        Ok(w.finish())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_sigma_gives_origin() {
        let mut rs = RandomSearch::new(
            4,
            &RandomSearchConfig {
                population: 3,
                sigma0: 0.0,
            },
            1,
        )
        .unwrap();
        assert!(rs.ask().unwrap().iter().flatten().all(|&x| x == 0.0));
    }

    #[test]
    fn tell_does_not_change_proposals() {
        let cfg = RandomSearchConfig {
            population: 5,
            sigma0: 2.0,
        };
        let mut a = RandomSearch::new(6, &cfg, 9).unwrap();
        let mut b = RandomSearch::new(6, &cfg, 9).unwrap();
        for g in 0..5 {
            let ca = a.ask().unwrap();
            let cb = b.ask().unwrap();
            assert_eq!(ca, cb);
            let sa: Vec<f64> = ca.iter().map(|c| c[0]).collect();
            let sb: Vec<f64> = (0..5).map(|i| (i * g) as f64).collect();
            a.tell(&ca, &sa).unwrap();
            b.tell(&cb, &sb).unwrap();
        }
    }
}
