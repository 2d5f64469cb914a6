//! Fit `A cos(2 pi omega (t/T + phi))` to a PC projection.
//!
//! For a fixed `omega` the model is linear in `(A cos, A sin)`, so the fit is
//! a grid search over `omega` in `[k/2 - 1, k/2 + 1]` (floored at 0.05)
//! followed by golden-section refinement, with linear least squares inside.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::DiagnosticsError;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CosineFit {
    pub amplitude: f64,
    pub omega: f64,
    pub phase: f64,
    pub r2: f64,
}

const GRID: usize = 400;
const MIN_OMEGA: f64 = 0.05;

struct Linear {
    a: f64,
    b: f64,
    sse: f64,
}

fn solve(y: &[f64], omega: f64) -> Linear {
    let t_len = y.len() as f64;
    let (mut cc, mut ss, mut cs, mut yc, mut ys) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for (t, &v) in y.iter().enumerate() {
        let th = 2.0 * PI * omega * t as f64 / t_len;
        let (s, c) = th.sin_cos();
        cc += c * c;
        ss += s * s;
        cs += c * s;
        yc += v * c;
        ys += v * s;
    }
    let det = cc * ss - cs * cs;
    let (a, b) = if det.abs() > 1e-12 * (cc * ss).max(1e-300) {
        ((yc * ss - ys * cs) / det, (ys * cc - yc * cs) / det)
    } else {
        (yc / cc.max(1e-300), 0.0)
    };
    let sse = y
        .iter()
        .enumerate()
        .map(|(t, &v)| {
            let th = 2.0 * PI * omega * t as f64 / t_len;
            (v - a * th.cos() - b * th.sin()).powi(2)
        })
        .sum();
    Linear { a, b, sse }
}

pub fn cosine_fit(projection: &[f64], k: usize) -> Result<CosineFit, DiagnosticsError> {
    let n = projection.len();
    if n < 8 {
        return Err(DiagnosticsError::TooShort { need: 8, got: n });
    }
    if projection.iter().any(|x| !x.is_finite()) {
        return Err(DiagnosticsError::NonFinite);
    }
    let center = k as f64 / 2.0;
    let lo = (center - 1.0).max(MIN_OMEGA);
    let hi = center + 1.0;
    let step = (hi - lo) / GRID as f64;
    let mut best = (lo, f64::INFINITY);
    for i in 0..=GRID {
        let w = lo + step * i as f64;
        let sse = solve(projection, w).sse;
        if sse < best.1 {
            best = (w, sse);
        }
    }
    // golden section on the bracketing grid cell
    let (mut a, mut b) = ((best.0 - step).max(lo), (best.0 + step).min(hi));
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = b - g * (b - a);
    let mut x2 = a + g * (b - a);
    let (mut f1, mut f2) = (solve(projection, x1).sse, solve(projection, x2).sse);
    for _ in 0..100 {
        if b - a < 1e-12 {
            break;
        }
        if f1 < f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - g * (b - a);
            f1 = solve(projection, x1).sse;
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + g * (b - a);
            f2 = solve(projection, x2).sse;
        }
    }
    let mut omega = 0.5 * (a + b);
    let mut fit = solve(projection, omega);
    if best.1 < fit.sse {
        omega = best.0;
        fit = solve(projection, omega);
    }
    let mean = projection.iter().sum::<f64>() / n as f64;
    let ss_tot: f64 = projection.iter().map(|v| (v - mean).powi(2)).sum();
    let r2 = if ss_tot > 0.0 {
        1.0 - fit.sse / ss_tot
    } else {
        1.0
    };
    let amplitude = fit.a.hypot(fit.b);
    let phase = -fit.b.atan2(fit.a) / (2.0 * PI * omega);
    if !(amplitude.is_finite() && r2.is_finite() && phase.is_finite()) {
        return Err(DiagnosticsError::FitDiverged(format!(
            "omega {omega}, amplitude {amplitude}"
        )));
    }
    Ok(CosineFit {
        amplitude,
        omega,
        phase,
        r2,
    })
}

impl CosineFit {
    pub fn eval(&self, t: usize, t_len: usize) -> f64 {
        self.amplitude * (2.0 * PI * self.omega * (t as f64 / t_len as f64 + self.phase)).cos()
    }
}
