//! Per-run trajectory summaries: squared-norm growth and within-generation
//! spread.

use serde::{Deserialize, Serialize};

use super::DiagnosticsError;
use crate::linalg::{dot, norm};

/// Mean code per generation plus the optimizer's step size.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeanTrajectory {
    pub means: Vec<Vec<f64>>,
    pub step_sizes: Vec<Option<f64>>,
}

impl MeanTrajectory {
    pub fn new(means: Vec<Vec<f64>>) -> Self {
        let n = means.len();
        Self {
            means,
            step_sizes: vec![None; n],
        }
    }

    pub fn len(&self) -> usize {
        self.means.len()
    }

    pub fn is_empty(&self) -> bool {
        self.means.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.means.first().map_or(0, Vec::len)
    }

    pub fn validate(&self, min_len: usize) -> Result<(), DiagnosticsError> {
        if self.len() < min_len {
            return Err(DiagnosticsError::TooShort {
                need: min_len,
                got: self.len(),
            });
        }
        let d = self.dim();
        if let Some(r) = self.means.iter().find(|r| r.len() != d) {
            return Err(DiagnosticsError::DimensionMismatch(d, r.len()));
        }
        if self.means.iter().flatten().any(|x| !x.is_finite()) {
            return Err(DiagnosticsError::NonFinite);
        }
        Ok(())
    }

    /// Evolution direction: last mean minus first.
    pub fn direction(&self) -> Vec<f64> {
        crate::linalg::sub(&self.means[self.len() - 1], &self.means[0])
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub r2: f64,
}

/// Ordinary least squares of `y` on `x`. A perfect fit (including constant
/// `y`) has `r2 = 1`.
pub fn linear_fit(x: &[f64], y: &[f64]) -> LinearFit {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let intercept = my - slope * mx;
    let ss_tot: f64 = y.iter().map(|b| (b - my).powi(2)).sum();
    let ss_res: f64 = x
        .iter()
        .zip(y)
        .map(|(a, b)| (b - intercept - slope * a).powi(2))
        .sum();
    let r2 = if ss_tot > 0.0 {
        1.0 - ss_res / ss_tot
    } else {
        1.0
    };
    LinearFit {
        slope,
        intercept,
        r2,
    }
}

/// Least-squares line through `(t, |mean_t|^2)`.
pub fn norm_growth_fit(traj: &MeanTrajectory) -> Result<LinearFit, DiagnosticsError> {
    traj.validate(10)?;
    let t: Vec<f64> = (0..traj.len()).map(|i| i as f64).collect();
    let sq: Vec<f64> = traj.means.iter().map(|m| dot(m, m)).collect();
    Ok(linear_fit(&t, &sq))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AngularStats {
    /// Mean pairwise angle in radians over pairs of nonzero codes.
    pub mean_angle: f64,
    /// Mean pairwise Euclidean distance over all pairs.
    pub mean_l2: f64,
    /// Per-dimension standard deviation averaged over dimensions.
    pub mean_std: f64,
    /// Pairs skipped because a code had zero norm.
    pub excluded_pairs: usize,
}

pub fn angular_stats(codes: &[Vec<f64>]) -> Result<AngularStats, DiagnosticsError> {
    let b = codes.len();
    if b < 2 {
        return Err(DiagnosticsError::TooShort { need: 2, got: b });
    }
    let d = codes[0].len();
    if let Some(c) = codes.iter().find(|c| c.len() != d) {
        return Err(DiagnosticsError::DimensionMismatch(d, c.len()));
    }
    let norms: Vec<f64> = codes.iter().map(|c| norm(c)).collect();
    let (mut ang, mut n_ang, mut l2, mut excluded) = (0.0, 0usize, 0.0, 0usize);
    for i in 0..b {
        for j in i + 1..b {
            l2 += codes[i]
                .iter()
                .zip(&codes[j])
                .map(|(x, y)| (x - y).powi(2))
                .sum::<f64>()
                .sqrt();
            if norms[i] == 0.0 || norms[j] == 0.0 {
                excluded += 1;
                continue;
            }
            let c = (dot(&codes[i], &codes[j]) / (norms[i] * norms[j])).clamp(-1.0, 1.0);
            ang += c.acos();
            n_ang += 1;
        }
    }
    let pairs = (b * (b - 1) / 2) as f64;
    let mean = crate::linalg::mean_rows(codes);
    let mut std_sum = 0.0;
    for k in 0..d {
        let v = codes.iter().map(|c| (c[k] - mean[k]).powi(2)).sum::<f64>() / b as f64;
        std_sum += v.sqrt();
    }
    Ok(AngularStats {
        mean_angle: if n_ang > 0 {
            ang / n_ang as f64
        } else {
            f64::NAN
        },
        mean_l2: l2 / pairs,
        mean_std: std_sum / d.max(1) as f64,
        excluded_pairs: excluded,
    })
}
