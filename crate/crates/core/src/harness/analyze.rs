//! Diagnostics over persisted runs, rendered as Markdown plus CSV tables.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use super::record::RunRecord;
use super::HarnessError;
use crate::diagnostics::alignment::shuffle_control;
use crate::diagnostics::stats::mean;
use crate::diagnostics::{
    cosine_fit, eigenframe_projection, lissajous_project, norm_growth_fit, pca_mean_trajectory,
    theoretical_expvar, EigenFrame,
};

/// Components compared against the random-walk law and fitted with cosines.
const PCA_ROWS: usize = 8;
const ALIGN_SHUFFLES: usize = 500;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Analysis {
    Pca,
    CosFit,
    NormGrowth,
    CovMetrics,
    Align,
}

impl std::str::FromStr for Analysis {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        Ok(match s.trim() {
            "pca" => Self::Pca,
            "cosfit" => Self::CosFit,
            "normgrowth" => Self::NormGrowth,
            "covmetrics" => Self::CovMetrics,
            "align" => Self::Align,
            other => {
                return Err(format!(
                    "unknown analysis {other:?} (pca, cosfit, normgrowth, covmetrics, align)"
                ))
            }
        })
    }
}

#[derive(Debug, Default)]
pub struct AnalysisReport {
    pub markdown: String,
    /// CSV files written, by name.
    pub csv_files: Vec<PathBuf>,
    pub warnings: Vec<String>,
    /// Analyses that failed, with the reason; the others still ran.
    pub failures: Vec<(Analysis, String)>,
}

fn group_by_optimizer(records: &[RunRecord]) -> BTreeMap<String, Vec<&RunRecord>> {
    let mut g: BTreeMap<String, Vec<&RunRecord>> = BTreeMap::new();
    for r in records.iter().filter(|r| r.is_complete()) {
        g.entry(r.optimizer.clone()).or_default().push(r);
    }
    g
}

fn write_csv(path: &Path, header: &[&str], rows: &[Vec<String>]) -> Result<(), HarnessError> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(header)?;
    for r in rows {
        w.write_record(r)?;
    }
    w.flush()?;
    Ok(())
}

fn f(x: f64) -> String {
    super::export::fmt_f64(x)
}

fn pca_section(
    records: &[RunRecord],
    out: &Path,
    rep: &mut AnalysisReport,
) -> Result<(), HarnessError> {
    let mut md = String::from("## PCA of mean trajectories\n\n");
    let mut rows = Vec::new();
    let mut liss = Vec::new();
    for (opt, runs) in group_by_optimizer(records) {
        let mut acc = vec![Vec::new(); PCA_ROWS];
        let mut t_len = 0;
        for r in &runs {
            let traj = r.mean_trajectory();
            t_len = traj.len();
            let p = match pca_mean_trajectory(&traj) {
                Ok(p) => p,
                Err(e) => {
                    rep.warnings.push(format!("pca skipped {}: {e}", r.run_id));
                    continue;
                }
            };
            for (k, a) in acc.iter_mut().enumerate() {
                if let Some(v) = p.ratios.get(k) {
                    a.push(*v);
                    rows.push(vec![
                        r.run_id.clone(),
                        opt.clone(),
                        (k + 1).to_string(),
                        f(*v),
                    ]);
                }
            }
            if let Ok(curve) = lissajous_project(&p, 1, 2) {
                for (t, (x, y)) in curve.iter().enumerate() {
                    liss.push(vec![r.run_id.clone(), t.to_string(), f(*x), f(*y)]);
                }
            }
        }
        let _ = writeln!(
            md,
            "### {opt} ({} runs)\n\n| k | mean ratio | random-walk law |\n|---|---|---|",
            runs.len()
        );
        for (k, a) in acc.iter().enumerate() {
            if a.is_empty() {
                continue;
            }
            let theory = theoretical_expvar(k + 1, t_len)
                .map(|v| format!("{v:.4}"))
                .unwrap_or_default();
            let _ = writeln!(md, "| {} | {:.4} | {theory} |", k + 1, mean(a));
        }
        md.push('\n');
    }
    let path = out.join("pca_ratios.csv");
    write_csv(&path, &["run_id", "optimizer", "k", "ratio"], &rows)?;
    rep.csv_files.push(path);
    let path = out.join("lissajous_pc1_pc2.csv");
    write_csv(&path, &["run_id", "generation", "pc1", "pc2"], &liss)?;
    rep.csv_files.push(path);
    rep.markdown.push_str(&md);
    Ok(())
}

fn cosfit_section(
    records: &[RunRecord],
    out: &Path,
    rep: &mut AnalysisReport,
) -> Result<(), HarnessError> {
    let mut md = String::from("## Cosine fits of PC projections\n\n");
    let mut rows = Vec::new();
    for (opt, runs) in group_by_optimizer(records) {
        let mut omega = vec![Vec::new(); PCA_ROWS];
        let mut r2 = vec![Vec::new(); PCA_ROWS];
        for r in &runs {
            let Ok(p) = pca_mean_trajectory(&r.mean_trajectory()) else {
                continue;
            };
            for (k, proj) in p.projections.iter().take(PCA_ROWS).enumerate() {
                match cosine_fit(proj, k + 1) {
                    Ok(fit) => {
                        omega[k].push(fit.omega);
                        r2[k].push(fit.r2);
                        rows.push(vec![
                            r.run_id.clone(),
                            opt.clone(),
                            (k + 1).to_string(),
                            f(fit.amplitude),
                            f(fit.omega),
                            f(fit.phase),
                            f(fit.r2),
                        ]);
                    }
                    Err(e) => {
                        rep.warnings
                            .push(format!("cosine fit {} k={}: {e}", r.run_id, k + 1))
                    }
                }
            }
        }
        let _ = writeln!(md, "### {opt}\n\n| k | mean omega | k/2 | mean R^2 | share R^2 > 0.8 |\n|---|---|---|---|---|");
        for k in 0..PCA_ROWS {
            if omega[k].is_empty() {
                continue;
            }
            let share = r2[k].iter().filter(|x| **x > 0.8).count() as f64 / r2[k].len() as f64;
            let _ = writeln!(
                md,
                "| {} | {:.3} | {:.1} | {:.3} | {:.2} |",
                k + 1,
                mean(&omega[k]),
                (k + 1) as f64 / 2.0,
                mean(&r2[k]),
                share
            );
        }
        md.push('\n');
    }
    let path = out.join("cosine_fits.csv");
    write_csv(
        &path,
        &[
            "run_id",
            "optimizer",
            "k",
            "amplitude",
            "omega",
            "phase",
            "r2",
        ],
        &rows,
    )?;
    rep.csv_files.push(path);
    rep.markdown.push_str(&md);
    Ok(())
}

fn normgrowth_section(
    records: &[RunRecord],
    out: &Path,
    rep: &mut AnalysisReport,
) -> Result<(), HarnessError> {
    let mut md = String::from("## Squared-norm growth\n\n| optimizer | runs | mean slope | mean r^2 | min r^2 |\n|---|---|---|---|---|\n");
    let mut rows = Vec::new();
    for (opt, runs) in group_by_optimizer(records) {
        let mut slopes = Vec::new();
        let mut r2 = Vec::new();
        for r in &runs {
            match norm_growth_fit(&r.mean_trajectory()) {
                Ok(fit) => {
                    slopes.push(fit.slope);
                    r2.push(fit.r2);
                    rows.push(vec![
                        r.run_id.clone(),
                        opt.clone(),
                        f(fit.slope),
                        f(fit.intercept),
                        f(fit.r2),
                    ]);
                }
                Err(e) => rep.warnings.push(format!("norm growth {}: {e}", r.run_id)),
            }
        }
        if !r2.is_empty() {
            let min = r2.iter().cloned().fold(f64::INFINITY, f64::min);
            let _ = writeln!(
                md,
                "| {opt} | {} | {:.4} | {:.5} | {:.5} |",
                r2.len(),
                mean(&slopes),
                mean(&r2),
                min
            );
        }
    }
    md.push('\n');
    let path = out.join("norm_growth.csv");
    write_csv(
        &path,
        &["run_id", "optimizer", "slope", "intercept", "r2"],
        &rows,
    )?;
    rep.csv_files.push(path);
    rep.markdown.push_str(&md);
    Ok(())
}

fn covmetrics_section(
    records: &[RunRecord],
    out: &Path,
    rep: &mut AnalysisReport,
) -> Result<(), HarnessError> {
    let mut md = String::from("## Final covariance shape\n\n| optimizer | runs | mean kappa | mean delta |\n|---|---|---|---|\n");
    let mut rows = Vec::new();
    for (opt, runs) in group_by_optimizer(records) {
        let m: Vec<_> = runs
            .iter()
            .filter_map(|r| r.final_covariance.map(|c| (r, c)))
            .collect();
        if m.is_empty() {
            continue;
        }
        for (r, c) in &m {
            rows.push(vec![r.run_id.clone(), opt.clone(), f(c.kappa), f(c.delta)]);
        }
        let kappa: Vec<f64> = m.iter().map(|x| x.1.kappa).collect();
        let delta: Vec<f64> = m.iter().map(|x| x.1.delta).collect();
        let _ = writeln!(
            md,
            "| {opt} | {} | {:.6} | {:.3e} |",
            m.len(),
            mean(&kappa),
            mean(&delta)
        );
    }
    md.push('\n');
    let path = out.join("cov_metrics.csv");
    write_csv(&path, &["run_id", "optimizer", "kappa", "delta"], &rows)?;
    rep.csv_files.push(path);
    rep.markdown.push_str(&md);
    Ok(())
}

fn align_section(
    records: &[RunRecord],
    frame: Option<&EigenFrame>,
    cutoff: Option<usize>,
    out: &Path,
    rep: &mut AnalysisReport,
) -> Result<(), HarnessError> {
    let Some(frame) = frame else {
        return Err(HarnessError::Config(
            "eigenframe alignment needs an eigenframe file; pass --frame <file>".into(),
        ));
    };
    let cutoff = cutoff.unwrap_or_else(|| frame.default_cutoff());
    let mut md = format!(
        "## Eigenframe alignment (cutoff {cutoff}, {ALIGN_SHUFFLES} shuffles)\n\n| optimizer | runs | r | p | KS | shuffle r (95th pct) |\n|---|---|---|---|---|---|\n"
    );
    let mut rows = Vec::new();
    for (opt, runs) in group_by_optimizer(records) {
        let dirs: Vec<Vec<f64>> = runs
            .iter()
            .filter(|r| r.generations.len() >= 2)
            .map(|r| r.mean_trajectory().direction())
            .collect();
        if dirs.is_empty() {
            continue;
        }
        let stats = eigenframe_projection(&dirs, frame, cutoff)?;
        let mut rng = crate::rng::stream(0, &[crate::rng::label(&opt)]);
        let mut null = shuffle_control(&dirs, frame, cutoff, ALIGN_SHUFFLES, &mut rng)?;
        null.sort_by(f64::total_cmp);
        let q95 = null[(null.len() as f64 * 0.95) as usize % null.len()];
        let _ = writeln!(
            md,
            "| {opt} | {} | {:.3} | {:.2e} | {:.3} | {:.3} |",
            dirs.len(),
            stats.pearson_r,
            stats.pearson_p,
            stats.ks_stat,
            q95
        );
        for (k, a) in stats.amplitudes.iter().enumerate() {
            rows.push(vec![
                opt.clone(),
                (k + 1).to_string(),
                f(frame.values[k]),
                f(*a),
            ]);
        }
    }
    md.push('\n');
    let path = out.join("alignment.csv");
    write_csv(&path, &["optimizer", "k", "eigenvalue", "amplitude"], &rows)?;
    rep.csv_files.push(path);
    rep.markdown.push_str(&md);
    Ok(())
}

/// Run the requested analyses over `records`, writing CSVs into `out`.
pub fn analyze(
    records: &[RunRecord],
    analyses: &[Analysis],
    frame: Option<&EigenFrame>,
    cutoff: Option<usize>,
    out: &Path,
) -> Result<AnalysisReport, HarnessError> {
    std::fs::create_dir_all(out)?;
    let mut rep = AnalysisReport {
        markdown: "# Trajectory diagnostics\n\n".into(),
        ..Default::default()
    };
    if records.iter().all(|r| !r.is_complete()) {
        rep.warnings.push("no completed runs to analyze".into());
        rep.markdown
            .push_str("> warning: no completed runs to analyze\n");
        return Ok(rep);
    }
    for a in analyses {
        let res = match a {
            Analysis::Pca => pca_section(records, out, &mut rep),
            Analysis::CosFit => cosfit_section(records, out, &mut rep),
            Analysis::NormGrowth => normgrowth_section(records, out, &mut rep),
            Analysis::CovMetrics => covmetrics_section(records, out, &mut rep),
            Analysis::Align => align_section(records, frame, cutoff, out, &mut rep),
        };
        if let Err(e) = res {
            let _ = writeln!(rep.markdown, "> {a:?} failed: {e}\n");
            rep.failures.push((*a, e.to_string()));
        }
    }
    for w in &rep.warnings {
        let _ = writeln!(rep.markdown, "> warning: {w}");
    }
    Ok(rep)
}
