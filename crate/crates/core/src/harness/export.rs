//! CSV export. Floats are written with 17 significant digits so a read-back
//! reproduces them exactly.
//!
//! Trajectory CSV, one row per (run, generation):
//!
//! | column | meaning |
//! |---|---|
//! | run_id, optimizer, landscape, profile | run identity (profile empty when not applicable) |
//! | alpha, repetition, seed | noise level, repetition index, run seed |
//! | generation | 0-based generation index |
//! | step_size | optimizer step size when the batch was drawn (empty if undefined) |
//! | mean_norm | norm of the generation's mean code |
//! | noisy_mean, noisy_max | noisy scores seen by the optimizer |
//! | clean_mean, clean_max | clean scores of the batch |
//! | clean_best_so_far | running maximum of clean scores |

use std::path::Path;

use super::record::RunRecord;
use super::summary::SummaryTable;
use super::HarnessError;
use crate::linalg::norm;

pub const TRAJECTORY_HEADER: [&str; 15] = [
    "run_id",
    "optimizer",
    "landscape",
    "profile",
    "alpha",
    "repetition",
    "seed",
    "generation",
    "step_size",
    "mean_norm",
    "noisy_mean",
    "noisy_max",
    "clean_mean",
    "clean_max",
    "clean_best_so_far",
];

pub const SUMMARY_HEADER: [&str; 7] = [
    "optimizer",
    "profile",
    "alpha",
    "n",
    "mean",
    "sem",
    "mean_runtime_secs",
];

pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len().max(1) as f64
}

fn max(xs: &[f64]) -> f64 {
    xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
}

pub fn write_trajectories<W: std::io::Write>(
    records: &[RunRecord],
    w: W,
) -> Result<usize, HarnessError> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(TRAJECTORY_HEADER)?;
    let mut rows = 0;
    for r in records {
        let mut best = f64::NEG_INFINITY;
        for (g, gen) in r.generations.iter().enumerate() {
            best = best.max(max(&gen.clean));
            out.write_record([
                r.run_id.clone(),
                r.optimizer.clone(),
                r.landscape.clone(),
                r.profile.clone().unwrap_or_default(),
                fmt_f64(r.alpha),
                r.repetition.to_string(),
                r.seed.to_string(),
                g.to_string(),
                gen.step_size.map(fmt_f64).unwrap_or_default(),
                fmt_f64(norm(&gen.mean)),
                fmt_f64(mean(&gen.noisy)),
                fmt_f64(max(&gen.noisy)),
                fmt_f64(mean(&gen.clean)),
                fmt_f64(max(&gen.clean)),
                fmt_f64(best),
            ])?;
            rows += 1;
        }
    }
    out.flush()?;
    Ok(rows)
}

/// Write the trajectory CSV; returns the number of data rows.
pub fn export_trajectories_csv(records: &[RunRecord], path: &Path) -> Result<usize, HarnessError> {
    write_trajectories(records, std::fs::File::create(path)?)
}

pub fn export_summary_csv(table: &SummaryTable, path: &Path) -> Result<(), HarnessError> {
    let mut out = csv::Writer::from_path(path)?;
    out.write_record(SUMMARY_HEADER)?;
    for c in &table.cells {
        out.write_record([
            c.optimizer.clone(),
            c.profile.clone(),
            fmt_f64(c.alpha),
            c.n.to_string(),
            fmt_f64(c.mean),
            fmt_f64(c.sem),
            fmt_f64(c.mean_runtime_secs),
        ])?;
    }
    out.flush()?;
    Ok(())
}
