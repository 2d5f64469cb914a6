//! Derivative-free optimizers for noisy, high-dimensional activation
//! maximization, together with the trajectory-geometry diagnostics used to
//! explain why they work and a reproducible benchmark harness.
//!
//! Modules:
//!
//! * [`geometry`]: sphere primitives (exponential map, SLERP, tangent
//!   projection), rank weighting and angular step-size decay.
//! * [`optimizers`]: ask/tell optimizers (SphereCMA, Cholesky-CMA-ES,
//!   diagonal CMA, a classic GA and random search) and binary snapshots.
//! * [`objectives`]: multiplicative noise model, synthetic ill-conditioned
//!   quadrics, pure-noise controls, score normalization and the
//!   newline-delimited JSON protocol for external objectives.
//! * [`diagnostics`]: PCA of mean trajectories, cosine fits, covariance
//!   metrics, norm growth, angular statistics and eigenframe alignment.
//! * [`harness`]: grid execution, persistence, summaries, CSV and reports.

pub mod diagnostics;
pub mod geometry;
pub mod harness;
pub mod linalg;
pub mod objectives;
pub mod optimizers;
pub mod rng;

pub use geometry::{DecayKind, DecaySchedule, GeometryError, SphereParams};
pub use optimizers::{AskTellOptimizer, OptimizerError, OptimizerKind};
