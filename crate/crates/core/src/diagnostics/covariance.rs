//! Condition number and relative distance to identity of a covariance,
//! `kappa = lambda_max / lambda_min` and `delta = |C - I|_F^2 / |C|_F^2`.

use nalgebra::DMatrix;

use super::DiagnosticsError;
use crate::linalg::lanczos_extremes;

/// Above this dimension a factored covariance is analysed through its Gram
/// matrix and Lanczos iteration instead of a full SVD.
pub const DENSE_LIMIT: usize = 512;
const LANCZOS_STEPS: usize = 400;

/// How a covariance is stored.
#[derive(Debug, Clone, Copy)]
pub enum CovarianceRepr<'a> {
    /// Full symmetric matrix `C`.
    Dense(&'a DMatrix<f64>),
    /// Factor `A` with `C = A A^T`; `A` need not be triangular.
    Cholesky(&'a DMatrix<f64>),
    /// Diagonal entries of `C`.
    Diagonal(&'a [f64]),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CovMetrics {
    pub kappa: f64,
    pub delta: f64,
}

pub fn cov_metrics(cov: CovarianceRepr<'_>) -> Result<CovMetrics, DiagnosticsError> {
    match cov {
        CovarianceRepr::Diagonal(c) => diagonal(c),
        CovarianceRepr::Dense(c) => dense(c),
        CovarianceRepr::Cholesky(a) if a.nrows() <= DENSE_LIMIT => factor_svd(a),
        CovarianceRepr::Cholesky(a) => factor_gram(a),
    }
}

fn finish(
    lo: f64,
    hi: f64,
    off_identity_sq: f64,
    total_sq: f64,
) -> Result<CovMetrics, DiagnosticsError> {
    if !lo.is_finite() || !hi.is_finite() || !off_identity_sq.is_finite() {
        return Err(DiagnosticsError::NonFinite);
    }
    if lo <= 0.0 {
        return Err(DiagnosticsError::NotPositiveDefinite(lo));
    }
    Ok(CovMetrics {
        kappa: hi / lo,
        delta: off_identity_sq / total_sq,
    })
}

fn diagonal(c: &[f64]) -> Result<CovMetrics, DiagnosticsError> {
    let lo = c.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = c.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let off: f64 = c.iter().map(|x| (x - 1.0).powi(2)).sum();
    let tot: f64 = c.iter().map(|x| x * x).sum();
    finish(lo, hi, off, tot)
}

/// Sums of squares of `C - I` and `C`, entrywise so tiny deviations from the
/// identity are not lost to cancellation.
fn frobenius_parts(c: &DMatrix<f64>) -> (f64, f64) {
    let mut off = 0.0;
    let mut tot = 0.0;
    for j in 0..c.ncols() {
        for i in 0..c.nrows() {
            let x = c[(i, j)];
            tot += x * x;
            let e = if i == j { x - 1.0 } else { x };
            off += e * e;
        }
    }
    (off, tot)
}

fn dense(c: &DMatrix<f64>) -> Result<CovMetrics, DiagnosticsError> {
    if !c.is_square() {
        return Err(DiagnosticsError::DimensionMismatch(c.nrows(), c.ncols()));
    }
    let ev = c.clone().symmetric_eigenvalues();
    let lo = ev.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = ev.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let (off, tot) = frobenius_parts(c);
    finish(lo, hi, off, tot)
}

/// Eigenvalues of `A A^T` are the squared singular values of `A`.
fn factor_svd(a: &DMatrix<f64>) -> Result<CovMetrics, DiagnosticsError> {
    if !a.is_square() {
        return Err(DiagnosticsError::DimensionMismatch(a.nrows(), a.ncols()));
    }
    let sv = a.singular_values();
    let lo = sv.iter().cloned().fold(f64::INFINITY, f64::min).powi(2);
    let hi = sv.iter().cloned().fold(f64::NEG_INFINITY, f64::max).powi(2);
    let off: f64 = sv.iter().map(|s| (s * s - 1.0).powi(2)).sum();
    let tot: f64 = sv.iter().map(|s| s.powi(4)).sum();
    finish(lo, hi, off, tot)
}

/// `A^T A` has the same spectrum as `A A^T`; its Frobenius parts give delta
/// and Lanczos on it gives the extreme eigenvalues.
fn factor_gram(a: &DMatrix<f64>) -> Result<CovMetrics, DiagnosticsError> {
    if !a.is_square() {
        return Err(DiagnosticsError::DimensionMismatch(a.nrows(), a.ncols()));
    }
    let d = a.nrows();
    let g = a.tr_mul(a);
    let (off, tot) = frobenius_parts(&g);
    // Lanczos on G - I keeps the clustered spectrum well scaled
    let start: Vec<f64> = (0..d)
        .map(|i| 1.0 + ((i * 7919) % 104_729) as f64 / 104_729.0)
        .collect();
    let (lo, hi) = lanczos_extremes(d, LANCZOS_STEPS, &start, |v| {
        let x = nalgebra::DVectorView::from_slice(v, d);
        let y = &g * x - x;
        y.as_slice().to_vec()
    });
    finish(1.0 + lo, 1.0 + hi, off, tot)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_distr::{Distribution, StandardNormal};

    fn gaussian(d: usize, seed: u64) -> DMatrix<f64> {
        let mut rng = crate::rng::Rng::seed_from_u64(seed);
        DMatrix::from_fn(d, d, |_, _| StandardNormal.sample(&mut rng))
    }

    #[test]
    fn identity_and_hand_example() {
        let i = DMatrix::<f64>::identity(5, 5);
        for m in [
            cov_metrics(CovarianceRepr::Dense(&i)),
            cov_metrics(CovarianceRepr::Cholesky(&i)),
        ] {
            let m = m.unwrap();
            assert_eq!((m.kappa, m.delta), (1.0, 0.0));
        }
        let c = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![4.0, 1.0, 1.0]));
        let m = cov_metrics(CovarianceRepr::Dense(&c)).unwrap();
        assert!((m.kappa - 4.0).abs() < 1e-12 && (m.delta - 0.5).abs() < 1e-12);
        let m = cov_metrics(CovarianceRepr::Diagonal(&[4.0, 1.0, 1.0])).unwrap();
        assert!((m.kappa - 4.0).abs() < 1e-12 && (m.delta - 0.5).abs() < 1e-12);
    }

    #[test]
    fn representations_agree() {
        let d = 64;
        let a = DMatrix::<f64>::identity(d, d) + gaussian(d, 1) * 0.05;
        let c = &a * a.transpose();
        let dense = cov_metrics(CovarianceRepr::Dense(&c)).unwrap();
        let svd = factor_svd(&a).unwrap();
        let gram = factor_gram(&a).unwrap();
        for m in [svd, gram] {
            assert!((m.kappa - dense.kappa).abs() < 1e-8 * dense.kappa);
            assert!((m.delta - dense.delta).abs() < 1e-10);
        }
    }

    #[test]
    fn gram_route_resolves_near_identity_spectra() {
        // perturbations the size a slow covariance learner leaves behind
        let d = 600;
        let a = DMatrix::<f64>::identity(d, d) + gaussian(d, 2) * (1e-5 / (d as f64).sqrt());
        let exact = factor_svd(&a).unwrap();
        let gram = factor_gram(&a).unwrap();
        assert!(((gram.kappa - 1.0) / (exact.kappa - 1.0) - 1.0).abs() < 1e-3);
        assert!((gram.delta / exact.delta - 1.0).abs() < 1e-6);
    }

    #[test]
    fn orthogonal_conjugation_invariance() {
        let d = 64;
        let b = gaussian(d, 3);
        let c = &b * b.transpose() / d as f64 + DMatrix::identity(d, d) * 0.5;
        let q = gaussian(d, 4).qr().q();
        let rotated = &q * &c * q.transpose();
        let m1 = cov_metrics(CovarianceRepr::Dense(&c)).unwrap();
        let m2 = cov_metrics(CovarianceRepr::Dense(&rotated)).unwrap();
        assert!((m1.kappa - m2.kappa).abs() < 1e-8 * m1.kappa);
        assert!((m1.delta - m2.delta).abs() < 1e-8);
    }

    #[test]
    fn indefinite_rejected() {
        let c = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![1.0, -1.0]));
        assert!(matches!(
            cov_metrics(CovarianceRepr::Dense(&c)),
            Err(DiagnosticsError::NotPositiveDefinite(_))
        ));
        assert!(cov_metrics(CovarianceRepr::Diagonal(&[1.0, 0.0])).is_err());
    }
}
