//! Alignment of evolution directions with an eigenframe, plus the
//! entry-shuffling null model.

use nalgebra::DMatrix;
use rand::seq::SliceRandom;

use super::frame::EigenFrame;
use super::stats::{ks_two_sample, pearson, pearson_p_greater};
use super::DiagnosticsError;
use crate::linalg::dot;

#[derive(Debug, Clone, PartialEq)]
pub struct AlignmentStats {
    /// `a_k`: mean absolute projection of the directions on eigenvector `k`.
    pub amplitudes: Vec<f64>,
    pub cutoff: usize,
    /// Pearson correlation of `a_k` with `log lambda_k` over `k < cutoff`
    /// (positive eigenvalues only). `NaN` if undefined.
    pub pearson_r: f64,
    /// One-sided p-value for a positive correlation.
    pub pearson_p: f64,
    /// KS statistic between amplitudes above and below the cutoff.
    pub ks_stat: f64,
    pub ks_p: f64,
}

pub fn amplitudes(
    directions: &[Vec<f64>],
    frame: &EigenFrame,
) -> Result<Vec<f64>, DiagnosticsError> {
    if directions.is_empty() {
        return Err(DiagnosticsError::EmptyDirectionSet);
    }
    if let Some(z) = directions.iter().find(|z| z.len() != frame.dim()) {
        return Err(DiagnosticsError::DimensionMismatch(z.len(), frame.dim()));
    }
    let p = directions.len() as f64;
    Ok(frame
        .basis
        .iter()
        .map(|u| directions.iter().map(|z| dot(u, z).abs()).sum::<f64>() / p)
        .collect())
}

fn top_correlation(a: &[f64], frame: &EigenFrame, cutoff: usize) -> (f64, usize) {
    let (x, y): (Vec<f64>, Vec<f64>) = frame.values[..cutoff]
        .iter()
        .zip(&a[..cutoff])
        .filter(|(l, _)| **l > 0.0)
        .map(|(l, a)| (l.ln(), *a))
        .unzip();
    (pearson(&y, &x).unwrap_or(f64::NAN), x.len())
}

/// Per-eigenvector amplitudes and their relation to the spectrum. `cutoff`
/// is clamped to `1..frame.len()`.
pub fn eigenframe_projection(
    directions: &[Vec<f64>],
    frame: &EigenFrame,
    cutoff: usize,
) -> Result<AlignmentStats, DiagnosticsError> {
    let a = amplitudes(directions, frame)?;
    let cutoff = cutoff.clamp(1, frame.len().saturating_sub(1).max(1));
    let (r, n) = top_correlation(&a, frame, cutoff);
    let p = if r.is_nan() {
        f64::NAN
    } else {
        pearson_p_greater(r, n)
    };
    let (ks_stat, ks_p) = if cutoff < a.len() {
        ks_two_sample(&a[..cutoff], &a[cutoff..])
    } else {
        (f64::NAN, f64::NAN)
    };
    Ok(AlignmentStats {
        amplitudes: a,
        cutoff,
        pearson_r: r,
        pearson_p: p,
        ks_stat,
        ks_p,
    })
}

/// Permute the entries of each direction independently. Norms are preserved.
pub fn shuffle_directions<R: rand::Rng + ?Sized>(
    directions: &[Vec<f64>],
    rng: &mut R,
) -> Vec<Vec<f64>> {
    directions
        .iter()
        .map(|z| {
            let mut s = z.clone();
            s.shuffle(rng);
            s
        })
        .collect()
}

/// Correlation statistic of `n` independently shuffled copies of the
/// direction set.
pub fn shuffle_control<R: rand::Rng + ?Sized>(
    directions: &[Vec<f64>],
    frame: &EigenFrame,
    cutoff: usize,
    n: usize,
    rng: &mut R,
) -> Result<Vec<f64>, DiagnosticsError> {
    (0..n)
        .map(|_| {
            eigenframe_projection(&shuffle_directions(directions, rng), frame, cutoff)
                .map(|s| s.pearson_r)
        })
        .collect()
}

/// Singular values of the `P x d` direction matrix, descending.
pub fn direction_singular_values(directions: &[Vec<f64>]) -> Result<Vec<f64>, DiagnosticsError> {
    if directions.is_empty() {
        return Err(DiagnosticsError::EmptyDirectionSet);
    }
    let p = directions.len();
    let gram = DMatrix::from_fn(p, p, |i, j| dot(&directions[i], &directions[j]));
    let mut sv: Vec<f64> = gram
        .symmetric_eigenvalues()
        .iter()
        .map(|l| l.max(0.0).sqrt())
        .collect();
    sv.sort_by(|a, b| b.total_cmp(a));
    Ok(sv)
}

/// Top `top` singular values for each of `n` shuffles: a null distribution
/// for how concentrated the directions are.
pub fn shuffle_null_singular_values<R: rand::Rng + ?Sized>(
    directions: &[Vec<f64>],
    n: usize,
    top: usize,
    rng: &mut R,
) -> Result<Vec<Vec<f64>>, DiagnosticsError> {
    (0..n)
        .map(|_| {
            let mut sv = direction_singular_values(&shuffle_directions(directions, rng))?;
            sv.truncate(top);
            Ok(sv)
        })
        .collect()
}
