//! Normalized-score tables and pairwise Welch tests.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::record::RunRecord;
use super::HarnessError;
use crate::diagnostics::stats::{mean, sem, welch_t_test};
use crate::objectives::normalize_scores;
use crate::optimizers::OptimizerKind;

/// Profile label of pooled rows.
pub const POOLED: &str = "pooled";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormalizedRun {
    pub run_id: String,
    pub optimizer: String,
    pub kind: OptimizerKind,
    pub landscape: String,
    pub profile: String,
    pub alpha: f64,
    pub score: f64,
    pub runtime_secs: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellSummary {
    pub optimizer: String,
    pub profile: String,
    pub alpha: f64,
    pub n: usize,
    pub mean: f64,
    pub sem: f64,
    pub mean_runtime_secs: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairTest {
    pub profile: String,
    pub alpha: f64,
    pub a: String,
    pub b: String,
    pub t: f64,
    pub df: f64,
    pub p: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RatioRow {
    /// `None` for the row pooled over noise levels.
    pub alpha: Option<f64>,
    pub cma_mean: f64,
    pub ga_mean: f64,
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct SummaryTable {
    pub runs: Vec<NormalizedRun>,
    /// Per (optimizer, profile, alpha), followed by rows pooled over profiles.
    pub cells: Vec<CellSummary>,
    pub tests: Vec<PairTest>,
    /// CMA-family mean over GA mean.
    pub ratios: Vec<RatioRow>,
    pub excluded_units: Vec<String>,
    pub warnings: Vec<String>,
}

fn same_alpha(a: f64, b: f64) -> bool {
    a.to_bits() == b.to_bits()
}

impl SummaryTable {
    /// Normalized scores of one optimizer at one noise level, optionally
    /// restricted to a profile.
    pub fn samples(&self, optimizer: &str, profile: Option<&str>, alpha: f64) -> Vec<f64> {
        self.runs
            .iter()
            .filter(|r| r.optimizer == optimizer && same_alpha(r.alpha, alpha))
            .filter(|r| profile.is_none_or(|p| p == POOLED || r.profile == p))
            .map(|r| r.score)
            .collect()
    }

    pub fn cell(&self, optimizer: &str, profile: &str, alpha: f64) -> Option<&CellSummary> {
        self.cells.iter().find(|c| {
            c.optimizer == optimizer && c.profile == profile && same_alpha(c.alpha, alpha)
        })
    }

    pub fn test(&self, a: &str, b: &str, profile: &str, alpha: f64) -> Option<&PairTest> {
        self.tests
            .iter()
            .find(|t| t.a == a && t.b == b && t.profile == profile && same_alpha(t.alpha, alpha))
    }

    pub fn to_markdown(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "## Normalized clean scores\n");
        let _ = writeln!(
            s,
            "| optimizer | profile | alpha | n | mean | sem | runtime (s) |"
        );
        let _ = writeln!(s, "|---|---|---|---|---|---|---|");
        for c in &self.cells {
            let _ = writeln!(
                s,
                "| {} | {} | {} | {} | {:.4} | {:.4} | {:.3} |",
                c.optimizer, c.profile, c.alpha, c.n, c.mean, c.sem, c.mean_runtime_secs
            );
        }
        if !self.ratios.is_empty() {
            let _ = writeln!(s, "\n## CMA-family mean / GA mean\n");
            let _ = writeln!(s, "| alpha | CMA-family mean | GA mean | ratio |");
            let _ = writeln!(s, "|---|---|---|---|");
            for r in &self.ratios {
                let alpha = r.alpha.map_or("all".to_string(), |a| a.to_string());
                let _ = writeln!(
                    s,
                    "| {alpha} | {:.4} | {:.4} | {:.3} |",
                    r.cma_mean, r.ga_mean, r.ratio
                );
            }
        }
        if !self.tests.is_empty() {
            let _ = writeln!(s, "\n## Welch t-tests\n");
            let _ = writeln!(s, "| profile | alpha | a | b | t | df | p |");
            let _ = writeln!(s, "|---|---|---|---|---|---|---|");
            for t in &self.tests {
                let _ = writeln!(
                    s,
                    "| {} | {} | {} | {} | {:.3} | {:.1} | {:.3e} |",
                    t.profile, t.alpha, t.a, t.b, t.t, t.df, t.p
                );
            }
        }
        for w in self
            .warnings
            .iter()
            .chain(self.excluded_units.iter().map(|u| u as &String))
        {
            let _ = writeln!(s, "\n> note: {w}");
        }
        s
    }
}

/// Normalize each record's clean best by the largest clean best on its
/// landscape, then tabulate.
pub fn summarize(records: &[RunRecord]) -> Result<SummaryTable, HarnessError> {
    let usable: Vec<&RunRecord> = records
        .iter()
        .filter(|r| r.is_complete() && r.final_clean_best.is_some())
        .collect();
    if usable.is_empty() {
        return Err(HarnessError::InsufficientData(
            "no completed runs to summarize".into(),
        ));
    }
    let mut units: BTreeMap<String, Vec<f64>> = BTreeMap::new();
    for r in &usable {
        units
            .entry(r.landscape.clone())
            .or_default()
            .push(r.final_clean_best.expect("filtered"));
    }
    let normalized = normalize_scores(&units);
    let mut table = SummaryTable {
        excluded_units: normalized
            .excluded
            .iter()
            .map(|u| format!("unit {u} never scored above zero; excluded"))
            .collect(),
        ..Default::default()
    };
    let mut cursor: BTreeMap<&str, usize> = BTreeMap::new();
    for r in &usable {
        let Some(scores) = normalized.units.get(&r.landscape) else {
            continue;
        };
        let i = cursor.entry(r.landscape.as_str()).or_default();
        table.runs.push(NormalizedRun {
            run_id: r.run_id.clone(),
            optimizer: r.optimizer.clone(),
            kind: r.kind,
            landscape: r.landscape.clone(),
            profile: r.profile.clone().unwrap_or_else(|| r.landscape.clone()),
            alpha: r.alpha,
            score: scores[*i],
            runtime_secs: r.runtime_secs,
        });
        *i += 1;
    }

    let mut optimizers: Vec<String> = Vec::new();
    let mut profiles: Vec<String> = Vec::new();
    let mut alphas: Vec<f64> = Vec::new();
    for r in &table.runs {
        if !optimizers.contains(&r.optimizer) {
            optimizers.push(r.optimizer.clone());
        }
        if !profiles.contains(&r.profile) {
            profiles.push(r.profile.clone());
        }
        if !alphas.iter().any(|a| same_alpha(*a, r.alpha)) {
            alphas.push(r.alpha);
        }
    }
    alphas.sort_by(f64::total_cmp);
    let mut scopes = profiles.clone();
    if profiles.len() > 1 {
        scopes.push(POOLED.to_string());
    }

    for scope in &scopes {
        for &alpha in &alphas {
            for o in &optimizers {
                let runs: Vec<&NormalizedRun> = table
                    .runs
                    .iter()
                    .filter(|r| &r.optimizer == o && same_alpha(r.alpha, alpha))
                    .filter(|r| scope == POOLED || &r.profile == scope)
                    .collect();
                if runs.is_empty() {
                    continue;
                }
                let scores: Vec<f64> = runs.iter().map(|r| r.score).collect();
                let times: Vec<f64> = runs.iter().map(|r| r.runtime_secs).collect();
                table.cells.push(CellSummary {
                    optimizer: o.clone(),
                    profile: scope.clone(),
                    alpha,
                    n: scores.len(),
                    mean: mean(&scores),
                    sem: sem(&scores),
                    mean_runtime_secs: mean(&times),
                });
            }
            for (i, a) in optimizers.iter().enumerate() {
                for b in &optimizers[i + 1..] {
                    let sa = table.samples(a, Some(scope), alpha);
                    let sb = table.samples(b, Some(scope), alpha);
                    if sa.is_empty() || sb.is_empty() {
                        continue;
                    }
                    match welch_t_test(&sa, &sb) {
                        Some(w) => table.tests.push(PairTest {
                            profile: scope.clone(),
                            alpha,
                            a: a.clone(),
                            b: b.clone(),
                            t: w.t,
                            df: w.df,
                            p: w.p,
                        }),
                        None => table.warnings.push(format!(
                            "fewer than two runs for {a} or {b} ({scope}, alpha {alpha}); t-test omitted"
                        )),
                    }
                }
            }
        }
    }

    let family = |pred: &dyn Fn(OptimizerKind) -> bool, alpha: Option<f64>| -> Vec<f64> {
        table
            .runs
            .iter()
            .filter(|r| pred(r.kind) && alpha.is_none_or(|a| same_alpha(a, r.alpha)))
            .map(|r| r.score)
            .collect()
    };
    let mut ratios = Vec::new();
    for alpha in alphas.iter().map(|a| Some(*a)).chain(std::iter::once(None)) {
        let cma = family(&|k: OptimizerKind| k.is_cma_family(), alpha);
        let ga = family(&|k: OptimizerKind| k == OptimizerKind::Ga, alpha);
        if !cma.is_empty() && !ga.is_empty() {
            let (cm, gm) = (mean(&cma), mean(&ga));
            ratios.push(RatioRow {
                alpha,
                cma_mean: cm,
                ga_mean: gm,
                ratio: cm / gm,
            });
        }
    }
    table.ratios = ratios;
    Ok(table)
}
