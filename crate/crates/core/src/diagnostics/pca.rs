//! PCA of a mean trajectory and the random-walk explained-variance law.

use std::f64::consts::PI;

use nalgebra::DMatrix;

use super::trajectory::MeanTrajectory;
use super::DiagnosticsError;

/// Number of leading axes returned with projections.
pub const MAX_AXES: usize = 30;

#[derive(Debug, Clone, PartialEq)]
pub struct PcaDecomposition {
    /// Explained-variance ratios of every nonzero component, descending.
    pub ratios: Vec<f64>,
    /// Leading principal axes as unit rows.
    pub axes: Vec<Vec<f64>>,
    /// `projections[k][t]`: centered mean at generation `t` on axis `k`.
    /// Signs are fixed so that each projection starts non-negative.
    pub projections: Vec<Vec<f64>>,
}

/// Centered PCA of the `T x d` trajectory through its `T x T` Gram matrix,
/// so memory stays `O(T d)`.
pub fn pca_mean_trajectory(traj: &MeanTrajectory) -> Result<PcaDecomposition, DiagnosticsError> {
    traj.validate(3)?;
    let t = traj.len();
    let d = traj.dim();
    let mean = crate::linalg::mean_rows(&traj.means);
    let centered: Vec<Vec<f64>> = traj
        .means
        .iter()
        .map(|r| crate::linalg::sub(r, &mean))
        .collect();
    let mut gram = DMatrix::<f64>::zeros(t, t);
    for i in 0..t {
        for j in 0..=i {
            let g = crate::linalg::dot(&centered[i], &centered[j]);
            gram[(i, j)] = g;
            gram[(j, i)] = g;
        }
    }
    let total = gram.trace();
    if !(total > 0.0) {
        return Err(DiagnosticsError::DegenerateTrajectory);
    }
    let eig = gram.symmetric_eigen();
    let mut order: Vec<usize> = (0..t).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));

    let rank = (t - 1).min(d);
    let lam: Vec<f64> = order
        .iter()
        .take(rank)
        .map(|&i| eig.eigenvalues[i].max(0.0))
        .collect();
    let lam_sum: f64 = lam.iter().sum();
    let ratios: Vec<f64> = lam.iter().map(|l| l / lam_sum).collect();

    let mut axes = Vec::new();
    let mut projections = Vec::new();
    for (k, &i) in order.iter().take(rank.min(MAX_AXES)).enumerate() {
        if lam[k] <= 1e-12 * lam[0] {
            break;
        }
        let v = eig.eigenvectors.column(i);
        let s = lam[k].sqrt();
        let sign = if v[0] < 0.0 { -1.0 } else { 1.0 };
        let mut axis = vec![0.0; d];
        for (tt, row) in centered.iter().enumerate() {
            crate::linalg::axpy(sign * v[tt] / s, row, &mut axis);
        }
        axes.push(axis);
        projections.push(v.iter().map(|x| sign * x * s).collect());
    }
    Ok(PcaDecomposition {
        ratios,
        axes,
        projections,
    })
}

/// Expected explained-variance ratio of the `k`-th PC of a `T`-step random
/// walk in high dimension.
pub fn theoretical_expvar(k: usize, t: usize) -> Result<f64, DiagnosticsError> {
    if k == 0 || t < 2 || k > t - 1 {
        return Err(DiagnosticsError::OutOfRange {
            k,
            max: t.saturating_sub(1),
        });
    }
    let tf = t as f64;
    // 1 - cos(x) written as 2 sin^2(x / 2) to avoid cancellation at small k / T
    let half = (PI * k as f64 / (2.0 * tf)).sin();
    let num = 0.25 / (half * half);
    Ok(num / ((tf * tf - 1.0) / 6.0))
}

/// `(x_t, y_t)` pairs of the projections on PCs `i` and `j` (1-based).
pub fn lissajous_project(
    pca: &PcaDecomposition,
    i: usize,
    j: usize,
) -> Result<Vec<(f64, f64)>, DiagnosticsError> {
    let n = pca.projections.len();
    for k in [i, j] {
        if k == 0 || k > n {
            return Err(DiagnosticsError::OutOfRange { k, max: n });
        }
    }
    Ok(pca.projections[i - 1]
        .iter()
        .cloned()
        .zip(pca.projections[j - 1].iter().cloned())
        .collect())
}
