//! Ill-conditioned quadric landscapes with invariant subspaces.
//!
//! `f(z) = max(0, f_max - sum_k lambda_k (u_k . (z - z*))^2)` over a set of
//! orthonormal directions `u_k`; any displacement orthogonal to the `u_k`
//! leaves `f` unchanged.

use serde::{Deserialize, Serialize};

use super::ObjectiveError;
use crate::linalg::{dot, norm, random_orthonormal_rows, scale};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DepthProfile {
    /// Few active dimensions, steep spectrum.
    Shallow,
    Mid,
    /// Many active dimensions, gentle spectrum.
    Deep,
}

impl DepthProfile {
    pub const ALL: [DepthProfile; 3] = [Self::Shallow, Self::Mid, Self::Deep];

    pub fn active_fraction(self) -> f64 {
        match self {
            Self::Shallow => 0.02,
            Self::Mid => 0.1,
            Self::Deep => 0.5,
        }
    }

    pub fn active_dims(self, d: usize) -> usize {
        ((self.active_fraction() * d as f64).round() as usize).clamp(2, d)
    }

    /// `lambda_max / lambda_min` over the active dimensions: log-linear
    /// between 1e9 (shallow) and 1e4 (deep).
    pub fn condition_number(self) -> f64 {
        match self {
            Self::Shallow => 1e9,
            Self::Mid => 10f64.powf(6.5),
            Self::Deep => 1e4,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::Shallow => "shallow",
            Self::Mid => "mid",
            Self::Deep => "deep",
        }
    }
}

impl std::fmt::Display for DepthProfile {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for DepthProfile {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        Self::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| format!("unknown depth profile {s:?}"))
    }
}

/// Shape parameters shared by a generated suite.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LandscapeParams {
    pub f_max: f64,
    /// `f(0) / f_max`; fixes the overall curvature scale.
    pub origin_fraction: f64,
    /// `|z*|` as a multiple of `sqrt(d)`. The default puts the optimum
    /// outside the region a 75-generation search covers from the origin, so
    /// benchmark scores stay below the peak.
    pub optimum_norm_per_sqrt_dim: f64,
}

impl Default for LandscapeParams {
    fn default() -> Self {
        Self {
            f_max: 100.0,
            origin_fraction: 0.2,
            optimum_norm_per_sqrt_dim: 8.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuadricLandscape {
    pub id: String,
    pub profile: Option<DepthProfile>,
    pub z_star: Vec<f64>,
    /// Curvatures, descending, one per row of `frame`.
    pub spectrum: Vec<f64>,
    /// Orthonormal directions `u_k`, one per curvature.
    pub frame: Vec<Vec<f64>>,
    pub f_max: f64,
}

impl QuadricLandscape {
    pub fn new(
        id: impl Into<String>,
        z_star: Vec<f64>,
        spectrum: Vec<f64>,
        frame: Vec<Vec<f64>>,
        f_max: f64,
    ) -> Result<Self, ObjectiveError> {
        let bad = |m: &str| Err(ObjectiveError::InvalidSpec(m.into()));
        let d = z_star.len();
        if spectrum.len() != frame.len() || frame.iter().any(|u| u.len() != d) {
            return bad("one frame row of length d per curvature required");
        }
        if spectrum.iter().any(|l| !(*l >= 0.0)) || spectrum.windows(2).any(|w| w[0] < w[1]) {
            return bad("curvatures must be non-negative and descending");
        }
        if !f_max.is_finite() {
            return bad("f_max must be finite");
        }
        Ok(Self {
            id: id.into(),
            profile: None,
            z_star,
            spectrum,
            frame,
            f_max,
        })
    }

    pub fn dim(&self) -> usize {
        self.z_star.len()
    }

    pub fn active_dims(&self) -> usize {
        self.spectrum.iter().filter(|l| **l > 0.0).count()
    }

    /// Value before the floor at zero.
    pub fn unfloored(&self, z: &[f64]) -> Result<f64, ObjectiveError> {
        if z.len() != self.dim() {
            return Err(ObjectiveError::DimensionMismatch {
                expected: self.dim(),
                got: z.len(),
            });
        }
        let diff: Vec<f64> = z.iter().zip(&self.z_star).map(|(a, b)| a - b).collect();
        let mut penalty = 0.0;
        for (l, u) in self.spectrum.iter().zip(&self.frame) {
            if *l > 0.0 {
                penalty += l * dot(u, &diff).powi(2);
            }
        }
        Ok(self.f_max - penalty)
    }

    pub fn eval(&self, z: &[f64]) -> Result<f64, ObjectiveError> {
        Ok(self.unfloored(z)?.max(0.0))
    }
}

/// `count` landscapes per profile, deterministic in `rng`.
///
/// Each landscape draws a random orthonormal active frame, a log-linear
/// spectrum with the profile's condition number, and an optimum inside the
/// active span with norm `optimum_norm_per_sqrt_dim * sqrt(d)`. Curvatures
/// are then scaled so that `f(0) = origin_fraction * f_max`.
pub fn make_landscape_suite<R: rand::Rng + ?Sized>(
    d: usize,
    profiles: &[DepthProfile],
    count: usize,
    params: &LandscapeParams,
    rng: &mut R,
) -> Result<Vec<QuadricLandscape>, ObjectiveError> {
    use rand_distr::{Distribution, StandardNormal};
    if d < 16 {
        return Err(ObjectiveError::InvalidSpec(format!(
            "landscape dimension {d} must be >= 16"
        )));
    }
    if !(params.origin_fraction > 0.0 && params.origin_fraction < 1.0) {
        return Err(ObjectiveError::InvalidSpec(
            "origin fraction must lie in (0, 1)".into(),
        ));
    }
    let mut out = Vec::new();
    for &profile in profiles {
        for idx in 0..count {
            let a = profile.active_dims(d);
            let frame = random_orthonormal_rows(d, a, rng);
            let cond = profile.condition_number();
            let shape: Vec<f64> = (0..a)
                .map(|k| cond.powf(-(k as f64) / (a - 1) as f64))
                .collect();
            let coeffs: Vec<f64> = (0..a).map(|_| StandardNormal.sample(rng)).collect();
            let coeffs = scale(
                &coeffs,
                params.optimum_norm_per_sqrt_dim * (d as f64).sqrt() / norm(&coeffs),
            );
            let mut z_star = vec![0.0; d];
            for (c, u) in coeffs.iter().zip(&frame) {
                crate::linalg::axpy(*c, u, &mut z_star);
            }
            let base: f64 = shape.iter().zip(&coeffs).map(|(s, c)| s * c * c).sum();
            let lambda1 = (1.0 - params.origin_fraction) * params.f_max / base;
            let spectrum = shape.iter().map(|s| s * lambda1).collect();
            let mut l = QuadricLandscape::new(
                format!("{profile}-{idx}"),
                z_star,
                spectrum,
                frame,
                params.f_max,
            )?;
            l.profile = Some(profile);
            out.push(l);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    fn hand_landscape() -> QuadricLandscape {
        let frame = vec![
            vec![1.0, 0.0, 0.0],
            vec![0.0, 1.0, 0.0],
            vec![0.0, 0.0, 1.0],
        ];
        QuadricLandscape::new("h", vec![0.5, -1.0, 2.0], vec![1.0, 0.1, 0.0], frame, 10.0).unwrap()
    }

    #[test]
    fn hand_evaluation() {
        let l = hand_landscape();
        assert_eq!(l.eval(&[0.5, -1.0, 2.0]).unwrap(), 10.0);
        assert!((l.eval(&[1.5, 1.0, 2.0]).unwrap() - 8.6).abs() < 1e-12);
        // zero-curvature axis
        assert_eq!(l.eval(&[0.5, -1.0, -40.0]).unwrap(), 10.0);
        assert_eq!(l.eval(&[100.0, -1.0, 2.0]).unwrap(), 0.0);
        assert!(matches!(
            l.eval(&[1.0]),
            Err(ObjectiveError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn suite_shape() {
        let mut rng = crate::rng::Rng::seed_from_u64(1);
        let suite = make_landscape_suite(
            256,
            &DepthProfile::ALL,
            2,
            &LandscapeParams::default(),
            &mut rng,
        )
        .unwrap();
        assert_eq!(suite.len(), 6);
        assert_eq!(suite[0].active_dims(), 5);
        assert_eq!(suite[2].active_dims(), 26);
        assert_eq!(suite[4].active_dims(), 128);
        for l in &suite {
            let ratio = l.spectrum[0] / l.spectrum[l.active_dims() - 1];
            assert!(ratio >= 1e4 * (1.0 - 1e-9));
            assert!((l.eval(&l.z_star).unwrap() - 100.0).abs() < 1e-9);
            let p = LandscapeParams::default();
            assert!((l.eval(&vec![0.0; 256]).unwrap() - p.origin_fraction * p.f_max).abs() < 1e-6);
            assert!((norm(&l.z_star) - p.optimum_norm_per_sqrt_dim * 16.0).abs() < 1e-9);
        }
        let mut rng2 = crate::rng::Rng::seed_from_u64(1);
        let again = make_landscape_suite(
            256,
            &DepthProfile::ALL,
            2,
            &LandscapeParams::default(),
            &mut rng2,
        )
        .unwrap();
        assert_eq!(suite, again);
    }

    #[test]
    fn invariant_to_inactive_perturbations() {
        let mut rng = crate::rng::Rng::seed_from_u64(2);
        let l = &make_landscape_suite(
            64,
            &[DepthProfile::Mid],
            1,
            &LandscapeParams::default(),
            &mut rng,
        )
        .unwrap()[0];
        let mut w: Vec<f64> = (0..64).map(|i| (i as f64 * 0.37).sin()).collect();
        for u in &l.frame {
            let c = dot(u, &w);
            crate::linalg::axpy(-c, u, &mut w);
        }
        let z: Vec<f64> = (0..64).map(|i| 0.1 * i as f64).collect();
        let moved: Vec<f64> = z.iter().zip(&w).map(|(a, b)| a + 10.0 * b).collect();
        let (f0, f1) = (l.unfloored(&z).unwrap(), l.unfloored(&moved).unwrap());
        assert!((f0 - f1).abs() < 1e-9 * f0.abs().max(1.0));
    }
}
