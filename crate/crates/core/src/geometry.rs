//! Sphere and schedule primitives used by SphereCMA.
//!
//! All functions here are pure: they take slices and return fresh vectors.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::{dot, norm};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error("zero-length vector")]
    ZeroVector,
    #[error("tangent vector not orthogonal to base (m.v = {dot:e})")]
    NotTangent { dot: f64 },
    #[error("vector norms differ: {0} vs {1}")]
    NormMismatch(f64, f64),
    #[error("degenerate arc: endpoints are antipodal")]
    DegenerateArc,
    #[error("empty score vector")]
    EmptyScores,
    #[error("cutoff K={k} outside 1..={b}")]
    InvalidCutoff { k: usize, b: usize },
    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
}

/// Radius-to-shell ratio of the reference configuration (R = 300 at d = 4096).
pub const RADIUS_PER_SQRT_DIM: f64 = 300.0 / 64.0;

pub fn default_radius(dim: usize) -> f64 {
    RADIUS_PER_SQRT_DIM * (dim as f64).sqrt()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SphereParams {
    pub radius: f64,
    pub dim: usize,
    pub learning_ratio: f64,
    pub population: usize,
    pub cutoff: usize,
}

impl SphereParams {
    /// Defaults: `R = 4.6875 sqrt(d)`, `lr = 1.5`, `K = max(1, B / 2)`.
    pub fn new(dim: usize, population: usize) -> Result<Self, GeometryError> {
        Self {
            radius: default_radius(dim),
            dim,
            learning_ratio: 1.5,
            population,
            cutoff: (population / 2).max(1),
        }
        .validated()
    }

    pub fn validated(self) -> Result<Self, GeometryError> {
        if !(self.radius > 0.0 && self.radius.is_finite()) {
            return Err(GeometryError::InvalidParams(format!(
                "radius {} must be > 0",
                self.radius
            )));
        }
        if self.dim < 2 {
            return Err(GeometryError::InvalidParams(
                "dimension must be >= 2".into(),
            ));
        }
        if !(self.learning_ratio > 0.0) {
            return Err(GeometryError::InvalidParams(
                "learning ratio must be > 0".into(),
            ));
        }
        if self.population < 2 {
            return Err(GeometryError::InvalidParams(
                "population must be >= 2".into(),
            ));
        }
        if self.cutoff == 0 || self.cutoff > self.population {
            return Err(GeometryError::InvalidCutoff {
                k: self.cutoff,
                b: self.population,
            });
        }
        Ok(self)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DecayKind {
    Exponential,
    Inverse,
}

/// Angular step size as a function of generation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecaySchedule {
    pub kind: DecayKind,
    pub mu0: f64,
    /// Floor angle; only used by the exponential schedule.
    pub mu_min: f64,
    pub tau: f64,
}

impl DecaySchedule {
    pub fn exponential(mu0: f64, mu_min: f64, tau: f64) -> Result<Self, GeometryError> {
        Self {
            kind: DecayKind::Exponential,
            mu0,
            mu_min,
            tau,
        }
        .validated()
    }

    pub fn inverse(mu0: f64, tau: f64) -> Result<Self, GeometryError> {
        Self {
            kind: DecayKind::Inverse,
            mu0,
            mu_min: 0.0,
            tau,
        }
        .validated()
    }

    /// `mu0 = 0.4`, `mu_min = 0.05`, `tau = generations / 3`.
    pub fn default_exponential(generations: usize) -> Self {
        Self::exponential(0.4, 0.05, (generations as f64 / 3.0).max(1.0)).expect("valid defaults")
    }

    /// `mu0 = 0.4`, `tau = 10`.
    pub fn default_inverse() -> Self {
        Self::inverse(0.4, 10.0).expect("valid defaults")
    }

    pub fn validated(self) -> Result<Self, GeometryError> {
        let ok = self.mu0 > self.mu_min
            && self.mu_min >= 0.0
            && self.mu0 < PI
            && self.tau > 0.0
            && self.tau.is_finite();
        if ok {
            Ok(self)
        } else {
            Err(GeometryError::InvalidParams(format!(
                "decay schedule needs pi > mu0 > mu_min >= 0 and tau > 0, got {self:?}"
            )))
        }
    }

    pub fn eval(&self, t: usize) -> f64 {
        decay_eval(self, t)
    }
}

pub fn decay_eval(schedule: &DecaySchedule, t: usize) -> f64 {
    let t = t as f64;
    match schedule.kind {
        DecayKind::Exponential => {
            schedule.mu_min + (schedule.mu0 - schedule.mu_min) * (-t / schedule.tau).exp()
        }
        DecayKind::Inverse => schedule.mu0 / (1.0 + t / schedule.tau),
    }
}

/// Travel an angle `mu` from `m` towards the tangent direction `v`, staying on
/// the sphere of radius `|m|`.
pub fn exp_map(m: &[f64], v: &[f64], mu: f64) -> Result<Vec<f64>, GeometryError> {
    if m.len() != v.len() {
        return Err(GeometryError::DimensionMismatch(m.len(), v.len()));
    }
    let r = norm(m);
    let nv = norm(v);
    if r == 0.0 || nv == 0.0 {
        return Err(GeometryError::ZeroVector);
    }
    let mv = dot(m, v);
    if mv.abs() > 1e-8 * r * nv {
        return Err(GeometryError::NotTangent { dot: mv });
    }
    let (s, c) = mu.sin_cos();
    let a = c; // R * cos(mu) / R
    let b = r * s / nv;
    Ok(m.iter().zip(v).map(|(mi, vi)| a * mi + b * vi).collect())
}

/// Spherical linear interpolation (t in [0, 1]) or extrapolation (t > 1)
/// along the great circle from `m` to `p`.
///
/// Arcs shorter than 1e-9 rad return `m` unchanged.
pub fn slerp(m: &[f64], p: &[f64], t: f64) -> Result<Vec<f64>, GeometryError> {
    if m.len() != p.len() {
        return Err(GeometryError::DimensionMismatch(m.len(), p.len()));
    }
    let nm = norm(m);
    let np = norm(p);
    if nm == 0.0 || np == 0.0 {
        return Err(GeometryError::ZeroVector);
    }
    if (nm - np).abs() > 1e-8 * nm.max(np) {
        return Err(GeometryError::NormMismatch(nm, np));
    }
    let cos = (dot(m, p) / (nm * np)).clamp(-1.0, 1.0);
    let theta = cos.acos();
    if theta < 1e-9 {
        return Ok(m.to_vec());
    }
    if theta >= PI - 1e-6 {
        return Err(GeometryError::DegenerateArc);
    }
    let st = theta.sin();
    let a = ((1.0 - t) * theta).sin() / st;
    let b = (t * theta).sin() / st;
    Ok(m.iter().zip(p).map(|(mi, pi)| a * mi + b * pi).collect())
}

/// Angle between two non-zero vectors.
pub fn angle(a: &[f64], b: &[f64]) -> f64 {
    (dot(a, b) / (norm(a) * norm(b))).clamp(-1.0, 1.0).acos()
}

/// Indices sorted by descending score; equal scores keep ascending index.
pub fn descending_order(scores: &[f64]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..scores.len()).collect();
    idx.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]).then(a.cmp(&b)));
    idx
}

/// Log-rank weights: the top `k` candidates get `ln(k + 1/2) - ln(rank)`,
/// the rest zero, normalized to sum to one and returned in input order.
pub fn rank_weight(scores: &[f64], k: usize) -> Result<Vec<f64>, GeometryError> {
    let b = scores.len();
    if b == 0 {
        return Err(GeometryError::EmptyScores);
    }
    if k == 0 || k > b {
        return Err(GeometryError::InvalidCutoff { k, b });
    }
    let raw = log_rank_weights(k);
    let mut w = vec![0.0; b];
    for (rank, &i) in descending_order(scores).iter().take(k).enumerate() {
        w[i] = raw[rank];
    }
    Ok(w)
}

/// Normalized `ln(k + 1/2) - ln(i)` for `i = 1..=k`.
pub fn log_rank_weights(k: usize) -> Vec<f64> {
    let top = (k as f64 + 0.5).ln();
    let raw: Vec<f64> = (1..=k).map(|i| top - (i as f64).ln()).collect();
    let s: f64 = raw.iter().sum();
    raw.into_iter().map(|x| x / s).collect()
}

/// Remove the component of `u` along `m`.
pub fn tangent_project(u: &[f64], m: &[f64]) -> Result<Vec<f64>, GeometryError> {
    if u.len() != m.len() {
        return Err(GeometryError::DimensionMismatch(u.len(), m.len()));
    }
    let mm = dot(m, m);
    if mm == 0.0 {
        return Err(GeometryError::ZeroVector);
    }
    let c = dot(m, u) / mm;
    Ok(u.iter().zip(m).map(|(ui, mi)| ui - c * mi).collect())
}

/// Rescale `v` to norm `radius`.
pub fn normalize_to(v: &[f64], radius: f64) -> Result<Vec<f64>, GeometryError> {
    let n = norm(v);
    if n == 0.0 {
        return Err(GeometryError::ZeroVector);
    }
    Ok(v.iter().map(|x| x * radius / n).collect())
}
