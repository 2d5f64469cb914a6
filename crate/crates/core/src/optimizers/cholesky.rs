//! (mu/mu_w, lambda)-Cholesky-CMA-ES.
//!
//! The covariance is never formed. The sampler keeps a square factor `A`
//! with `C = A A^T` and its inverse, and applies rank-one modifications to
//! both directly. `A` starts at the identity and is not kept triangular.
//! Factor updates are deferred and applied once every `a_update_freq`
//! generations.

use nalgebra::{DMatrix, DVector};
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

/// User-facing configuration. Unset rates take the defaults of the
/// rank-one Cholesky-CMA-ES.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CholeskyConfig {
    pub population: usize,
    pub sigma0: f64,
    pub a_update_freq: usize,
    pub c1: Option<f64>,
    pub c_mu: Option<f64>,
    pub cc: Option<f64>,
    pub cs: Option<f64>,
    pub damps: Option<f64>,
    /// Starting mean; the origin when unset.
    pub init_mean: Option<Vec<f64>>,
}

impl Default for CholeskyConfig {
    fn default() -> Self {
        Self {
            population: 40,
            sigma0: 3.0,
            a_update_freq: 10,
            c1: None,
            c_mu: None,
            cc: None,
            cs: None,
            damps: None,
            init_mean: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CholeskyRates {
    pub c1: f64,
    pub c_mu: f64,
    pub cc: f64,
    pub cs: f64,
    pub damps: f64,
}

impl CholeskyRates {
    pub fn defaults(dim: usize, mu_eff: f64) -> Self {
        let n = dim as f64;
        let cs = mu_eff.sqrt() / (mu_eff.sqrt() + n.sqrt());
        Self {
            c1: 2.0 / (n + std::f64::consts::SQRT_2).powi(2),
            c_mu: 0.0,
            cc: 4.0 / (n + 4.0),
            cs,
            damps: 1.0 + cs + 2.0 * (((mu_eff - 1.0) / (n + 1.0)).sqrt() - 1.0).max(0.0),
        }
    }
}

pub struct CholeskyCma {
    dim: usize,
    population: usize,
    recomb: Recombination,
    rates: CholeskyRates,
    a_update_freq: usize,
    chi_n: f64,
    mean: DVector<f64>,
    sigma: f64,
    a: DMatrix<f64>,
    a_inv: DMatrix<f64>,
    pc: DVector<f64>,
    ps: DVector<f64>,
    generation: usize,
    since_update: usize,
    updates: usize,
    rng: Rng,
    phase: Phase,
    /// Standard-normal draws of the outstanding batch, one column per sample.
    pending: Option<DMatrix<f64>>,
}

impl CholeskyCma {
    pub fn new(dim: usize, config: &CholeskyConfig, seed: u64) -> Result<Self, OptimizerError> {
        if dim == 0 || config.population < 2 {
            return Err(OptimizerError::InvalidConfig(
                "need dim >= 1 and population >= 2".into(),
            ));
        }
        if !(config.sigma0 > 0.0) || config.a_update_freq == 0 {
            return Err(OptimizerError::InvalidConfig(
                "need sigma0 > 0 and a_update_freq >= 1".into(),
            ));
        }
        let recomb = Recombination::new(config.population);
        let d = CholeskyRates::defaults(dim, recomb.mu_eff);
        let rates = CholeskyRates {
            c1: config.c1.unwrap_or(d.c1),
            c_mu: config.c_mu.unwrap_or(d.c_mu),
            cc: config.cc.unwrap_or(d.cc),
            cs: config.cs.unwrap_or(d.cs),
            damps: config.damps.unwrap_or(d.damps),
        };
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
            Some(m) => DVector::from_column_slice(m),
            None => DVector::zeros(dim),
        };
        Ok(Self {
            dim,
            population: config.population,
            recomb,
            rates,
            a_update_freq: config.a_update_freq,
            chi_n: chi_mean(dim),
            mean,
            sigma: config.sigma0,
            a: DMatrix::identity(dim, dim),
            a_inv: DMatrix::identity(dim, dim),
            pc: DVector::zeros(dim),
            ps: DVector::zeros(dim),
            generation: 0,
            since_update: 0,
            updates: 0,
            rng: Rng::seed_from_u64(seed),
            phase: Phase::Ready,
            pending: None,
        })
    }

    pub fn rates(&self) -> CholeskyRates {
        self.rates
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn factor(&self) -> &DMatrix<f64> {
        &self.a
    }

    pub fn inverse_factor(&self) -> &DMatrix<f64> {
        &self.a_inv
    }

    pub fn evolution_path(&self) -> &[f64] {
        self.pc.as_slice()
    }

    /// Number of factor updates applied so far.
    pub fn factor_updates(&self) -> usize {
        self.updates
    }

    /// `C <- alpha C + beta y y^T`, applied to `A` and `A^-1` without
    /// refactorizing.
    pub fn rank_one_update(&mut self, alpha: f64, beta: f64, y: &DVector<f64>) {
        let sa = alpha.sqrt();
        let v = &self.a_inv * y;
        let nv2 = v.norm_squared();
        if beta == 0.0 || nv2 == 0.0 {
            if alpha != 1.0 {
                self.a *= sa;
                self.a_inv /= sa;
            }
            return;
        }
        let s = (1.0 + beta * nv2 / alpha).sqrt();
        // row vector v^T A^-1, taken before A^-1 changes
        let vt_ainv = self.a_inv.tr_mul(&v);
        self.a *= sa;
        self.a.ger(sa * (s - 1.0) / nv2, y, &v, 1.0);
        self.a_inv /= sa;
        self.a_inv
            .ger(-(1.0 - 1.0 / s) / (sa * nv2), &v, &vt_ainv, 1.0);
    }

    fn update_factor(&mut self, selected_y: &[DVector<f64>]) {
        let r = self.rates;
        let pc = self.pc.clone();
        self.rank_one_update(1.0 - r.c1 - r.c_mu, r.c1, &pc);
        if r.c_mu > 0.0 {
            for (w, y) in self.recomb.weights.clone().iter().zip(selected_y) {
                self.rank_one_update(1.0, r.c_mu * w, y);
            }
        }
        self.updates += 1;
    }

    pub fn from_snapshot(bytes: &[u8]) -> Result<Self, OptimizerError> {
        let mut r = SnapReader::new(bytes);
        let h = r.expect(OptimizerKind::CholeskyCma)?;
        let dim = h.dim as usize;
        let population = r.usize()?;
        let a_update_freq = r.usize()?;
        let rates = CholeskyRates {
            c1: r.f64()?,
            c_mu: r.f64()?,
            cc: r.f64()?,
            cs: r.f64()?,
            damps: r.f64()?,
        };
        let sigma = r.f64()?;
        let since_update = r.usize()?;
        let updates = r.usize()?;
        let mean = DVector::from_vec(r.f64s()?);
        let pc = DVector::from_vec(r.f64s()?);
        let ps = DVector::from_vec(r.f64s()?);
        let a = r.matrix()?;
        let a_inv = r.matrix()?;
        let rng = r.rng()?;
        r.finish()?;
        let shapes_ok = [
            mean.len(),
            pc.len(),
            ps.len(),
            a.nrows(),
            a.ncols(),
            a_inv.nrows(),
            a_inv.ncols(),
        ]
        .iter()
        .all(|&n| n == dim);
        if !shapes_ok {
            return Err(OptimizerError::Snapshot("inconsistent dimensions".into()));
        }
        Ok(Self {
            dim,
            population,
            recomb: Recombination::new(population),
            rates,
            a_update_freq,
            chi_n: chi_mean(dim),
            mean,
            sigma,
            a,
            a_inv,
            pc,
            ps,
            generation: h.generation as usize,
            since_update,
            updates,
            rng,
            phase: Phase::Ready,
            pending: None,
        })
    }
}

impl AskTellOptimizer for CholeskyCma {
    fn kind(&self) -> OptimizerKind {
        OptimizerKind::CholeskyCma
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
        self.mean.as_slice().to_vec()
    }

    fn step_size(&self) -> Option<f64> {
        Some(self.sigma)
    }

    fn ask(&mut self) -> Result<Batch, OptimizerError> {
        self.phase.begin_ask(self.population)?;
        let (d, n) = (self.dim, self.population);
        let z = DMatrix::<f64>::from_fn(d, n, |_, _| StandardNormal.sample(&mut self.rng));
        let mut x = &self.a * &z;
        x *= self.sigma;
        let batch = x
            .column_iter()
            .map(|col| {
                col.iter()
                    .zip(self.mean.iter())
                    .map(|(xi, mi)| xi + mi)
                    .collect()
            })
            .collect();
        self.pending = Some(z);
        Ok(batch)
    }

    fn tell(&mut self, codes: &[Vec<f64>], scores: &[f64]) -> Result<(), OptimizerError> {
        self.phase.check_tell(codes, scores, self.dim)?;
        let z = self
            .pending
            .take()
            .expect("pending draws exist while awaiting tell");
        self.phase = Phase::Ready;

        let order = descending_order(scores);
        let weights = &self.recomb.weights;
        let mut new_mean = DVector::zeros(self.dim);
        let mut zw = DVector::zeros(self.dim);
        for (&w, &i) in weights.iter().zip(&order) {
            new_mean.axpy(w, &DVector::from_column_slice(&codes[i]), 1.0);
            zw.axpy(w, &z.column(i), 1.0);
        }
        self.mean = new_mean;

        let r = self.rates;
        let mu_eff = self.recomb.mu_eff;
        self.ps *= 1.0 - r.cs;
        self.ps
            .axpy((r.cs * (2.0 - r.cs) * mu_eff).sqrt(), &zw, 1.0);
        let a_zw = &self.a * &zw;
        self.pc *= 1.0 - r.cc;
        self.pc
            .axpy((r.cc * (2.0 - r.cc) * mu_eff).sqrt(), &a_zw, 1.0);
        self.sigma *= ((r.cs / r.damps) * (self.ps.norm() / self.chi_n - 1.0)).exp();

        self.generation += 1;
        self.since_update += 1;
        if self.since_update >= self.a_update_freq {
            self.since_update = 0;
            let selected: Vec<DVector<f64>> = if r.c_mu > 0.0 {
                order
                    .iter()
                    .take(weights.len())
                    .map(|&i| &self.a * z.column(i))
                    .collect()
            } else {
                Vec::new()
            };
            self.update_factor(&selected);
        }
        Ok(())
    }

    fn covariance(&self) -> Option<CovarianceRepr<'_>> {
        Some(CovarianceRepr::Cholesky(&self.a))
    }

    fn snapshot(&self) -> Result<Vec<u8>, OptimizerError> {
        if !self.phase.is_ready() {
            return Err(OptimizerError::ProtocolViolation(
                "snapshot with an outstanding batch",
            ));
        }
        let mut w = SnapWriter::new(self.kind(), self.dim, self.generation);
        w.u64(self.population as u64);
        w.u64(self.a_update_freq as u64);
        let r = self.rates;
        for x in [r.c1, r.c_mu, r.cc, r.cs, r.damps, self.sigma] {
            w.f64(x);
        }
        w.u64(self.since_update as u64);
        w.u64(self.updates as u64);
        w.f64s(self.mean.as_slice());
        w.f64s(self.pc.as_slice());
        w.f64s(self.ps.as_slice());
        w.matrix(&self.a);
        w.matrix(&self.a_inv);
        w.rng(&self.rng);
        Ok(w.finish())
    }
}
