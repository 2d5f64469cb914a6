//! Trajectory-geometry analyses over optimizer runs.

use thiserror::Error;

pub mod alignment;
pub mod cosine;
pub mod covariance;
pub mod frame;
pub mod pca;
pub mod stats;
pub mod trajectory;

pub use alignment::{
    eigenframe_projection, shuffle_directions, shuffle_null_singular_values, AlignmentStats,
};
pub use cosine::{cosine_fit, CosineFit};
pub use covariance::{cov_metrics, CovMetrics, CovarianceRepr};
pub use frame::EigenFrame;
pub use pca::{lissajous_project, pca_mean_trajectory, theoretical_expvar, PcaDecomposition};
pub use stats::{pearson, welch_t_test, WelchResult};
pub use trajectory::{angular_stats, norm_growth_fit, AngularStats, LinearFit, MeanTrajectory};

#[derive(Debug, Error)]
pub enum DiagnosticsError {
    #[error("matrix is not positive definite (smallest eigenvalue {0:e})")]
    NotPositiveDefinite(f64),
    #[error("trajectory is degenerate: all rows identical")]
    DegenerateTrajectory,
    #[error("k={k} outside 1..={max}")]
    OutOfRange { k: usize, max: usize },
    #[error("cosine fit diverged: {0}")]
    FitDiverged(String),
    #[error("empty direction set")]
    EmptyDirectionSet,
    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),
    #[error("need at least {need} samples, got {got}")]
    TooShort { need: usize, got: usize },
    #[error("non-finite value in input")]
    NonFinite,
    #[error("eigenframe file: {0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
