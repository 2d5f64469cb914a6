//! Diagonal-covariance CMA (separable CMA-ES).
//!
//! Same mean and step-size machinery as the full-covariance variant, with the
//! covariance restricted to its diagonal and the covariance learning rates
//! multiplied by `(d + 2) / 3`.

use rand::SeedableRng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::snapshot::{SnapReader, SnapWriter};
use super::{
    chi_mean, AskTellOptimizer, Batch, OptimizerError, OptimizerKind, Phase, Recombination,
};
use crate::diagnostics::covariance::CovarianceRepr;
use crate::geometry::descending_order;
use crate::rng::Rng;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DiagonalConfig {
    pub population: usize,
    pub sigma0: f64,
    /// Multiplier on the full-matrix rates; `(d + 2) / 3` when unset.
    pub boost: Option<f64>,
    /// Overrides of the boosted rates.
    pub c1: Option<f64>,
    pub c_mu: Option<f64>,
    pub init_mean: Option<Vec<f64>>,
}

impl Default for DiagonalConfig {
    fn default() -> Self {
        Self {
            population: 40,
            sigma0: 3.0,
            boost: None,
            c1: None,
            c_mu: None,
            init_mean: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiagonalRates {
    pub c1: f64,
    pub c_mu: f64,
    pub cc: f64,
    pub cs: f64,
    pub damps: f64,
    pub boost: f64,
}

impl DiagonalRates {
    /// Standard CMA-ES defaults with the covariance rates boosted.
    pub fn defaults(dim: usize, mu_eff: f64, boost: Option<f64>) -> Self {
        let n = dim as f64;
        let boost = boost.unwrap_or((n + 2.0) / 3.0);
        let c1_full = 2.0 / ((n + 1.3).powi(2) + mu_eff);
        let cmu_full =
            (2.0 * (mu_eff - 2.0 + 1.0 / mu_eff) / ((n + 2.0).powi(2) + mu_eff)).min(1.0 - c1_full);
        let mut c1 = c1_full * boost;
        let mut c_mu = cmu_full * boost;
        // keep the update a convex combination
        let total = c1 + c_mu;
        if total > 0.9 {
            c1 *= 0.9 / total;
            c_mu *= 0.9 / total;
        }
        let cs = (mu_eff + 2.0) / (n + mu_eff + 5.0);
        Self {
            c1,
            c_mu,
            cc: (4.0 + mu_eff / n) / (n + 4.0 + 2.0 * mu_eff / n),
            cs,
            damps: 1.0 + 2.0 * (((mu_eff - 1.0) / (n + 1.0)).sqrt() - 1.0).max(0.0) + cs,
            boost,
        }
    }
}

pub struct DiagonalCma {
    dim: usize,
    population: usize,
    recomb: Recombination,
    rates: DiagonalRates,
    chi_n: f64,
    mean: Vec<f64>,
    sigma: f64,
    /// Per-coordinate variances.
    c: Vec<f64>,
    pc: Vec<f64>,
    ps: Vec<f64>,
    generation: usize,
    rng: Rng,
    phase: Phase,
    pending: Option<Vec<Vec<f64>>>,
}

impl DiagonalCma {
    pub fn new(dim: usize, config: &DiagonalConfig, seed: u64) -> Result<Self, OptimizerError> {
        if dim == 0 || config.population < 2 || !(config.sigma0 > 0.0) {
            return Err(OptimizerError::InvalidConfig(
                "need dim >= 1, population >= 2, sigma0 > 0".into(),
            ));
        }
        let recomb = Recombination::new(config.population);
        let mut rates = DiagonalRates::defaults(dim, recomb.mu_eff, config.boost);
        if let Some(c1) = config.c1 {
            rates.c1 = c1;
        }
        if let Some(cm) = config.c_mu {
            rates.c_mu = cm;
        }
        if rates.c1 < 0.0 || rates.c_mu < 0.0 || rates.c1 + rates.c_mu >= 1.0 {
            return Err(OptimizerError::InvalidConfig(
                "need c1, c_mu >= 0 and c1 + c_mu < 1".into(),
            ));
        }
        let mean = match &config.init_mean {
            Some(m) if m.len() != dim => {
                return Err(OptimizerError::InvalidConfig(format!(
                    "init_mean has length {}",
                    m.len()
                )))
            }
            Some(m) => m.clone(),
            None => vec![0.0; dim],
        };
        Ok(Self {
            dim,
            population: config.population,
            recomb,
            rates,
            chi_n: chi_mean(dim),
            mean,
            sigma: config.sigma0,
            c: vec![1.0; dim],
            pc: vec![0.0; dim],
            ps: vec![0.0; dim],
            generation: 0,
            rng: Rng::seed_from_u64(seed),
            phase: Phase::Ready,
            pending: None,
        })
    }

    pub fn rates(&self) -> DiagonalRates {
        self.rates
    }

    pub fn diagonal(&self) -> &[f64] {
        &self.c
    }

    pub fn from_snapshot(bytes: &[u8]) -> Result<Self, OptimizerError> {
        let mut r = SnapReader::new(bytes);
        let h = r.expect(OptimizerKind::DiagonalCma)?;
        let dim = h.dim as usize;
        let population = r.usize()?;
        let rates = DiagonalRates {
            c1: r.f64()?,
            c_mu: r.f64()?,
            cc: r.f64()?,
            cs: r.f64()?,
            damps: r.f64()?,
            boost: r.f64()?,
        };
        let sigma = r.f64()?;
        let mean = r.f64s()?;
        let c = r.f64s()?;
        let pc = r.f64s()?;
        let ps = r.f64s()?;
        let rng = r.rng()?;
        r.finish()?;
        if [mean.len(), c.len(), pc.len(), ps.len()]
            .iter()
            .any(|&n| n != dim)
        {
            return Err(OptimizerError::Snapshot("inconsistent dimensions".into()));
        }
        Ok(Self {
            dim,
            population,
            recomb: Recombination::new(population),
            rates,
            chi_n: chi_mean(dim),
            mean,
            sigma,
            c,
            pc,
            ps,
            generation: h.generation as usize,
            rng,
            phase: Phase::Ready,
            pending: None,
        })
    }
}

impl AskTellOptimizer for DiagonalCma {
    fn kind(&self) -> OptimizerKind {
        OptimizerKind::DiagonalCma
    }

    fn dim(&self) -> usize {
        self.dim
    }

    fn population(&self) -> usize {
        self.population
    }

    fn generation(&self) -> usize {
        self.generation
    }

    fn mean(&self) -> Vec<f64> {
        self.mean.clone()
    }

    fn step_size(&self) -> Option<f64> {
        Some(self.sigma)
    }

    fn ask(&mut self) -> Result<Batch, OptimizerError> {
        self.phase.begin_ask(self.population)?;
        let mut zs = Vec::with_capacity(self.population);
        let mut batch = Vec::with_capacity(self.population);
        for _ in 0..self.population {
            let z: Vec<f64> = (0..self.dim)
                .map(|_| StandardNormal.sample(&mut self.rng))
                .collect();
            let x = (0..self.dim)
                .map(|j| self.mean[j] + self.sigma * self.c[j].sqrt() * z[j])
                .collect();
            zs.push(z);
            batch.push(x);
        }
        self.pending = Some(zs);
        Ok(batch)
    }

    fn tell(&mut self, codes: &[Vec<f64>], scores: &[f64]) -> Result<(), OptimizerError> {
        self.phase.check_tell(codes, scores, self.dim)?;
        let zs = self
            .pending
            .take()
            .expect("pending draws exist while awaiting tell");
        self.phase = Phase::Ready;

        let d = self.dim;
        let order = descending_order(scores);
        let weights = &self.recomb.weights;
        let old_mean = std::mem::replace(&mut self.mean, vec![0.0; d]);
        let mut zw = vec![0.0; d];
        for (&w, &i) in weights.iter().zip(&order) {
            for j in 0..d {
                self.mean[j] += w * codes[i][j];
                zw[j] += w * zs[i][j];
            }
        }

        let r = self.rates;
        let mu_eff = self.recomb.mu_eff;
        let ks = (r.cs * (2.0 - r.cs) * mu_eff).sqrt();
        for j in 0..d {
            self.ps[j] = (1.0 - r.cs) * self.ps[j] + ks * zw[j];
        }
        let ps_norm = crate::linalg::norm(&self.ps);
        let t = (self.generation + 1) as f64;
        let h_sigma = ps_norm / (1.0 - (1.0 - r.cs).powf(2.0 * t)).sqrt() / self.chi_n
            < 1.4 + 2.0 / (d as f64 + 1.0);
        let kc = if h_sigma {
            (r.cc * (2.0 - r.cc) * mu_eff).sqrt()
        } else {
            0.0
        };
        for j in 0..d {
            // y_w = (m_new - m_old) / sigma
            let yw = (self.mean[j] - old_mean[j]) / self.sigma;
            self.pc[j] = (1.0 - r.cc) * self.pc[j] + kc * yw;
        }
        let decay = 1.0 - r.c1 - r.c_mu;
        for j in 0..d {
            let rank_mu: f64 = weights
                .iter()
                .zip(&order)
                .map(|(&w, &i)| {
                    let y = (codes[i][j] - old_mean[j]) / self.sigma;
                    w * y * y
                })
                .sum();
            let correction = if h_sigma {
                0.0
            } else {
                r.c1 * r.cc * (2.0 - r.cc) * self.c[j]
            };
            self.c[j] = decay * self.c[j]
                + r.c1 * (self.pc[j] * self.pc[j] + correction)
                + r.c_mu * rank_mu;
        }
        self.sigma *= ((r.cs / r.damps) * (ps_norm / self.chi_n - 1.0)).exp();
        self.generation += 1;
        Ok(())
    }

    fn covariance(&self) -> Option<CovarianceRepr<'_>> {
        Some(CovarianceRepr::Diagonal(&self.c))
    }

    fn snapshot(&self) -> Result<Vec<u8>, OptimizerError> {
        if !self.phase.is_ready() {
            return Err(OptimizerError::ProtocolViolation(
                "snapshot with an outstanding batch",
            ));
        }
        let mut w = SnapWriter::new(self.kind(), self.dim, self.generation);
        w.u64(self.population as u64);
        let r = self.rates;
        for x in [r.c1, r.c_mu, r.cc, r.cs, r.damps, r.boost, self.sigma] {
            w.f64(x);
        }
        w.f64s(&self.mean);
        w.f64s(&self.c);
        w.f64s(&self.pc);
        w.f64s(&self.ps);
        w.rng(&self.rng);
        Ok(w.finish())
    }
}
