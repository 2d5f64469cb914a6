//! Classic genetic algorithm over real-valued codes.
//!
//! Each generation keeps the top `elite_count` codes unchanged and fills the
//! rest with children. A child takes two parents drawn with probability
//! `softmax(z / temperature)` where `z` are the standardized scores, mixes
//! them gene-wise with uniform crossover and then mutates each gene with
//! probability `mutation_rate` by adding `N(0, mutation_scale^2)`.

use rand::distr::weighted::WeightedIndex;
use rand::{Rng as _, SeedableRng};
use rand_distr::{Distribution, Normal, StandardNormal};
use serde::{Deserialize, Serialize};

use super::snapshot::{SnapReader, SnapWriter};
use super::{AskTellOptimizer, Batch, OptimizerError, OptimizerKind, Phase};
use crate::geometry::descending_order;
use crate::linalg::mean_rows;
use crate::rng::Rng;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GaParams {
    pub population: usize,
    pub elite_count: usize,
    pub temperature: f64,
    pub mutation_rate: f64,
    pub mutation_scale: f64,
    /// Parents per child.
    pub parent_count: usize,
    /// Std of the isotropic Gaussian the first population is drawn from.
    pub init_scale: f64,
}

impl Default for GaParams {
    fn default() -> Self {
        Self {
            population: 40,
            elite_count: 10,
            temperature: 0.7,
            mutation_rate: 0.25,
            mutation_scale: 0.75,
            parent_count: 2,
            init_scale: 3.0,
        }
    }
}

impl GaParams {
    pub fn validate(&self) -> Result<(), OptimizerError> {
        let bad = |m: &str| Err(OptimizerError::InvalidConfig(m.into()));
        if self.population < 2 {
            return bad("population must be >= 2");
        }
        if self.elite_count >= self.population {
            return bad("elite count must be < population");
        }
        if !(0.0..=1.0).contains(&self.mutation_rate) {
            return bad("mutation rate must lie in [0, 1]");
        }
        if !(self.mutation_scale >= 0.0) || !(self.init_scale >= 0.0) {
            return bad("scales must be >= 0");
        }
        if !(self.temperature > 0.0) {
            return bad("temperature must be > 0");
        }
        if self.parent_count == 0 {
            return bad("parent count must be >= 1");
        }
        Ok(())
    }
}

/// Parent-selection probabilities: softmax of standardized scores divided by
/// `temperature`. Constant scores or an infinite temperature give a uniform
/// distribution.
pub fn selection_probabilities(scores: &[f64], temperature: f64) -> Vec<f64> {
    let n = scores.len() as f64;
    let mean = scores.iter().sum::<f64>() / n;
    let std = (scores.iter().map(|s| (s - mean).powi(2)).sum::<f64>() / n).sqrt();
    if std == 0.0 || !temperature.is_finite() {
        return vec![1.0 / n; scores.len()];
    }
    let z: Vec<f64> = scores
        .iter()
        .map(|s| (s - mean) / std / temperature)
        .collect();
    let top = z.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let e: Vec<f64> = z.iter().map(|x| (x - top).exp()).collect();
    let total: f64 = e.iter().sum();
    e.into_iter().map(|x| x / total).collect()
}

pub struct GeneticAlgorithm {
    dim: usize,
    params: GaParams,
    population: Vec<Vec<f64>>,
    generation: usize,
    rng: Rng,
    phase: Phase,
}

impl GeneticAlgorithm {
    pub fn new(dim: usize, params: &GaParams, seed: u64) -> Result<Self, OptimizerError> {
        params.validate()?;
        let mut rng = Rng::seed_from_u64(seed);
        let population = (0..params.population)
            .map(|_| {
                (0..dim)
                    .map(|_| {
                        params.init_scale * {
                            let x: f64 = StandardNormal.sample(&mut rng);
                            x
                        }
                    })
                    .collect()
            })
            .collect();
        Ok(Self {
            dim,
            params: params.clone(),
            population,
            generation: 0,
            rng,
            phase: Phase::Ready,
        })
    }

    /// Start from user-supplied codes instead of a random population.
    pub fn with_population(
        params: &GaParams,
        codes: Vec<Vec<f64>>,
        seed: u64,
    ) -> Result<Self, OptimizerError> {
        params.validate()?;
        let dim = codes.first().map_or(0, Vec::len);
        if codes.len() != params.population || codes.iter().any(|c| c.len() != dim) || dim == 0 {
            return Err(OptimizerError::InvalidConfig(
                "initial codes must be population x dim".into(),
            ));
        }
        Ok(Self {
            dim,
            params: params.clone(),
            population: codes,
            generation: 0,
            rng: Rng::seed_from_u64(seed),
            phase: Phase::Ready,
        })
    }

    pub fn params(&self) -> &GaParams {
        &self.params
    }

    pub fn from_snapshot(bytes: &[u8]) -> Result<Self, OptimizerError> {
        let mut r = SnapReader::new(bytes);
        let h = r.expect(OptimizerKind::Ga)?;
        let params = GaParams {
            population: r.usize()?,
            elite_count: r.usize()?,
            parent_count: r.usize()?,
            temperature: r.f64()?,
            mutation_rate: r.f64()?,
            mutation_scale: r.f64()?,
            init_scale: r.f64()?,
        };
        let population = r.rows()?;
        let rng = r.rng()?;
        r.finish()?;
        params.validate()?;
        let dim = h.dim as usize;
        if population.len() != params.population || population.iter().any(|c| c.len() != dim) {
            return Err(OptimizerError::Snapshot("inconsistent population".into()));
        }
        Ok(Self {
            dim,
            params,
            population,
            generation: h.generation as usize,
            rng,
            phase: Phase::Ready,
        })
    }
}

impl AskTellOptimizer for GeneticAlgorithm {
    fn kind(&self) -> OptimizerKind {
        OptimizerKind::Ga
    }

    fn dim(&self) -> usize {
        self.dim
    }

    fn population(&self) -> usize {
        self.params.population
    }

    fn generation(&self) -> usize {
        self.generation
    }

    fn mean(&self) -> Vec<f64> {
        mean_rows(&self.population)
    }

    fn step_size(&self) -> Option<f64> {
        None
    }

    fn ask(&mut self) -> Result<Batch, OptimizerError> {
        self.phase.begin_ask(self.params.population)?;
        Ok(self.population.clone())
    }

    fn tell(&mut self, codes: &[Vec<f64>], scores: &[f64]) -> Result<(), OptimizerError> {
        self.phase.check_tell(codes, scores, self.dim)?;
        self.phase = Phase::Ready;
        let p = &self.params;
        let order = descending_order(scores);
        let mut next: Vec<Vec<f64>> = order
            .iter()
            .take(p.elite_count)
            .map(|&i| codes[i].clone())
            .collect();

        let probs = selection_probabilities(scores, p.temperature);
        let picker =
            WeightedIndex::new(&probs).map_err(|e| OptimizerError::InvalidConfig(e.to_string()))?;
        let mutation = Normal::new(0.0, p.mutation_scale)
            .map_err(|e| OptimizerError::InvalidConfig(e.to_string()))?;
        while next.len() < p.population {
            let parents: Vec<usize> = (0..p.parent_count)
                .map(|_| picker.sample(&mut self.rng))
                .collect();
            let child: Vec<f64> = (0..self.dim)
                .map(|j| {
                    let from = parents[self.rng.random_range(0..parents.len())];
                    let mut g = codes[from][j];
                    if self.rng.random::<f64>() < p.mutation_rate {
                        g += mutation.sample(&mut self.rng);
                    }
                    g
                })
                .collect();
            next.push(child);
        }
        self.population = next;
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
        let mut w = SnapWriter::new(self.kind(), self.dim, self.generation);
        w.u64(p.population as u64);
        w.u64(p.elite_count as u64);
        w.u64(p.parent_count as u64);
        for x in [
            p.temperature,
            p.mutation_rate,
            p.mutation_scale,
            p.init_scale,
        ] {
            w.f64(x);
        }
        w.rows(&self.population);
        w.rng(&self.rng);
        Ok(w.finish())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identical_parents_without_mutation_clone() {
        let params = GaParams {
            population: 8,
            elite_count: 2,
            mutation_rate: 0.0,
            ..Default::default()
        };
        let code = vec![1.5, -2.0, 0.25];
        let mut ga = GeneticAlgorithm::with_population(&params, vec![code.clone(); 8], 1).unwrap();
        let codes = ga.ask().unwrap();
        let scores: Vec<f64> = (0..8).map(|i| i as f64).collect();
        ga.tell(&codes, &scores).unwrap();
        assert!(ga.ask().unwrap().iter().all(|c| c == &code));
    }

    #[test]
    fn elite_survives_unchanged() {
        let params = GaParams {
            population: 12,
            elite_count: 3,
            ..Default::default()
        };
        let mut ga = GeneticAlgorithm::new(5, &params, 3).unwrap();
        for _ in 0..10 {
            let codes = ga.ask().unwrap();
            let scores: Vec<f64> = codes
                .iter()
                .map(|c| -c.iter().map(|x| x * x).sum::<f64>())
                .collect();
            let best = &codes[descending_order(&scores)[0]];
            ga.tell(&codes, &scores).unwrap();
            let best = best.clone();
            let next = ga.ask().unwrap();
            assert!(next.contains(&best));
            // undo the ask so the loop can re-ask
            let s: Vec<f64> = next
                .iter()
                .map(|c| -c.iter().map(|x| x * x).sum::<f64>())
                .collect();
            ga.tell(&next, &s).unwrap();
        }
    }

    #[test]
    fn selection_is_scale_free_and_favors_high_scores() {
        let s = [1.0, 2.0, 3.0, 4.0];
        let p = selection_probabilities(&s, 0.7);
        let scaled: Vec<f64> = s.iter().map(|x| 1000.0 * x - 5.0).collect();
        let q = selection_probabilities(&scaled, 0.7);
        for (a, b) in p.iter().zip(&q) {
            assert!((a - b).abs() < 1e-12);
        }
        assert!(p.windows(2).all(|w| w[0] < w[1]));
        assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert_eq!(selection_probabilities(&[2.0; 3], 0.7), vec![1.0 / 3.0; 3]);
        assert_eq!(selection_probabilities(&s, f64::INFINITY), vec![0.25; 4]);
    }

    #[test]
    fn invalid_params_rejected() {
        assert!(GaParams {
            elite_count: 40,
            ..Default::default()
        }
        .validate()
        .is_err());
        assert!(GaParams {
            mutation_rate: 1.5,
            ..Default::default()
        }
        .validate()
        .is_err());
        assert!(GaParams {
            temperature: 0.0,
            ..Default::default()
        }
        .validate()
        .is_err());
    }
}
