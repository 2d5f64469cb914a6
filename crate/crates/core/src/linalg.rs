//! Small dense-vector helpers shared across modules.

use nalgebra::{DMatrix, DVector};

#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[inline]
pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub fn scale(a: &[f64], s: f64) -> Vec<f64> {
    a.iter().map(|x| x * s).collect()
}

pub fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

/// `y += alpha * x`
pub fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

/// Column-wise mean of a set of equal-length rows.
pub fn mean_rows(rows: &[Vec<f64>]) -> Vec<f64> {
    let d = rows.first().map_or(0, Vec::len);
    let mut out = vec![0.0; d];
    for r in rows {
        axpy(1.0, r, &mut out);
    }
    let n = rows.len().max(1) as f64;
    out.iter_mut().for_each(|x| *x /= n);
    out
}

/// Extreme eigenvalues `(min, max)` of a symmetric operator given as a
/// matrix-vector product, by Lanczos iteration with full reorthogonalization.
///
/// Iteration stops once the Krylov space becomes invariant or after
/// `max_iter` steps. Extremal Ritz values converge first, so this is the
/// route for large operators where a dense eigendecomposition is too slow.
pub fn lanczos_extremes<F>(dim: usize, max_iter: usize, start: &[f64], mut apply: F) -> (f64, f64)
where
    F: FnMut(&[f64]) -> Vec<f64>,
{
    let m = max_iter.min(dim).max(1);
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(m);
    let mut alphas = Vec::with_capacity(m);
    let mut betas: Vec<f64> = Vec::with_capacity(m);

    let n0 = norm(start);
    let mut q = scale(start, 1.0 / n0);
    for j in 0..m {
        let mut w = apply(&q);
        let a = dot(&q, &w);
        alphas.push(a);
        axpy(-a, &q, &mut w);
        if let (Some(prev), Some(&b)) = (basis.last(), betas.last()) {
            axpy(-b, prev, &mut w);
        }
        basis.push(q);
        // two passes of classical Gram-Schmidt against the whole basis
        for _ in 0..2 {
            for v in &basis {
                let c = dot(v, &w);
                axpy(-c, v, &mut w);
            }
        }
        let b = norm(&w);
        let scale_ref = alphas
            .iter()
            .fold(0.0f64, |acc, x| acc.max(x.abs()))
            .max(1e-300);
        if j + 1 == m || b <= 1e-12 * scale_ref {
            break;
        }
        betas.push(b);
        q = scale(&w, 1.0 / b);
    }

    let k = alphas.len();
    let mut t = DMatrix::<f64>::zeros(k, k);
    for i in 0..k {
        t[(i, i)] = alphas[i];
        if i + 1 < k {
            t[(i, i + 1)] = betas[i];
            t[(i + 1, i)] = betas[i];
        }
    }
    let ev = t.symmetric_eigenvalues();
    let lo = ev.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = ev.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    (lo, hi)
}

pub fn to_dvector(v: &[f64]) -> DVector<f64> {
    DVector::from_column_slice(v)
}

/// Orthonormal rows spanning `count` Gaussian directions in `R^dim`
/// (modified Gram-Schmidt, re-drawing any degenerate vector).
pub fn random_orthonormal_rows<R: rand::Rng + ?Sized>(
    dim: usize,
    count: usize,
    rng: &mut R,
) -> Vec<Vec<f64>> {
    use rand_distr::{Distribution, StandardNormal};
    assert!(count <= dim);
    let mut rows: Vec<Vec<f64>> = Vec::with_capacity(count);
    while rows.len() < count {
        let mut v: Vec<f64> = (0..dim).map(|_| StandardNormal.sample(rng)).collect();
        for _ in 0..2 {
            for r in &rows {
                let c = dot(r, &v);
                axpy(-c, r, &mut v);
            }
        }
        let n = norm(&v);
        if n > 1e-8 {
            rows.push(scale(&v, 1.0 / n));
        }
    }
    rows
}
