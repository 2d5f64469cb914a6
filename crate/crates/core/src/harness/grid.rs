//! Grid execution over optimizers x landscapes x noise levels x repetitions.
//!
//! Each cell gets a seed derived from the master seed and its coordinates,
//! so results do not depend on scheduling. Every finished or failed cell is
//! written to `<out>/runs/<run_id>.json` before `run_grid` returns; with
//! `resume` set, completed cells already on disk are loaded instead of rerun.

use std::path::{Path, PathBuf};

use rayon::prelude::*;

use super::config::{BenchmarkConfig, ObjectiveSpec};
use super::record::{RunRecord, RunStatus};
use super::runner::run_once;
use super::HarnessError;
use crate::objectives::{
    make_landscape_suite, NoiseOnly, NoiseSpec, NoisyQuadric, Objective, QuadricLandscape,
};
use crate::optimizers::isotropy_check;
use crate::rng::{derive, label, stream};

#[derive(Debug, Clone, Default)]
pub struct GridOptions {
    /// Worker threads; all available cores when `None`.
    pub threads: Option<usize>,
    pub resume: bool,
    /// Overrides the configured output directory.
    pub out_dir: Option<PathBuf>,
}

#[derive(Debug)]
pub struct GridOutcome {
    /// One record per cell, in grid order, including failed runs.
    pub records: Vec<RunRecord>,
    pub out_dir: PathBuf,
    pub resumed: usize,
}

impl GridOutcome {
    pub fn failures(&self) -> impl Iterator<Item = &RunRecord> {
        self.records.iter().filter(|r| !r.is_complete())
    }
}

/// The landscapes a configuration evaluates on.
pub fn build_landscapes(config: &BenchmarkConfig) -> Result<Vec<QuadricLandscape>, HarnessError> {
    let suite = &config.landscapes;
    let mut rng = stream(config.master_seed, &[label("landscapes")]);
    Ok(make_landscape_suite(
        config.dim,
        &suite.profiles,
        suite.per_profile,
        &suite.params,
        &mut rng,
    )?)
}

struct Cell {
    optimizer: usize,
    unit: usize,
    alpha: f64,
    repetition: usize,
}

fn run_id(opt: &str, unit: &str, alpha: f64, rep: usize) -> String {
    format!("{opt}__{unit}__a{alpha}__r{rep}")
}

pub fn run_grid(
    config: &BenchmarkConfig,
    options: &GridOptions,
) -> Result<GridOutcome, HarnessError> {
    let config = config.clone().validated()?;
    let out_dir = options
        .out_dir
        .clone()
        .or_else(|| config.output_dir.clone())
        .ok_or_else(|| HarnessError::Config("no output directory given".into()))?;
    let runs_dir = out_dir.join("runs");
    std::fs::create_dir_all(&runs_dir)?;
    let fingerprint = config.fingerprint();
    atomic_write(
        &out_dir.join("config.json"),
        serde_json::to_string_pretty(&config)?.as_bytes(),
    )?;

    let landscapes = match config.landscapes.objective {
        ObjectiveSpec::Quadric => build_landscapes(&config)?,
        ObjectiveSpec::NoiseOnly => Vec::new(),
    };
    let units: Vec<(String, Option<String>)> = match config.landscapes.objective {
        ObjectiveSpec::Quadric => landscapes
            .iter()
            .map(|l| (l.id.clone(), l.profile.map(|p| p.to_string())))
            .collect(),
        ObjectiveSpec::NoiseOnly => vec![("noise".to_string(), None)],
    };

    let mut cells = Vec::new();
    for optimizer in 0..config.optimizers.len() {
        for unit in 0..units.len() {
            for &alpha in &config.noise_levels {
                for repetition in 0..config.repetitions {
                    cells.push(Cell {
                        optimizer,
                        unit,
                        alpha,
                        repetition,
                    });
                }
            }
        }
    }

    let generations = config.generations();
    let execute = |cell: &Cell| -> (RunRecord, bool) {
        let spec = &config.optimizers[cell.optimizer];
        let name = spec.label();
        let (unit, profile) = &units[cell.unit];
        let id = run_id(&name, unit, cell.alpha, cell.repetition);
        let path = runs_dir.join(format!("{id}.json"));
        if options.resume {
            if let Ok(rec) = read_record(&path) {
                if rec.is_complete() && rec.fingerprint == fingerprint {
                    return (rec, true);
                }
            }
        }
        let seed = derive(
            config.master_seed,
            &[
                label(&name),
                label(unit),
                cell.alpha.to_bits(),
                cell.repetition as u64,
            ],
        );
        let mut record = RunRecord {
            run_id: id,
            fingerprint: fingerprint.clone(),
            optimizer: name,
            kind: spec.kind,
            landscape: unit.clone(),
            profile: profile.clone(),
            alpha: cell.alpha,
            repetition: cell.repetition,
            seed,
            dim: config.dim,
            population: config.population,
            generations: Vec::new(),
            runtime_secs: 0.0,
            final_clean_best: None,
            final_covariance: None,
            status: RunStatus::Complete,
        };
        let result = (|| -> Result<(), HarnessError> {
            let mut opt = spec.build(
                config.dim,
                config.population,
                generations,
                derive(seed, &[label("optimizer")]),
            )?;
            let noise = NoiseSpec::new(cell.alpha, derive(seed, &[label("noise")]))?;
            let mut obj: Box<dyn Objective + '_> = match config.landscapes.objective {
                ObjectiveSpec::Quadric => Box::new(NoisyQuadric {
                    landscape: &landscapes[cell.unit],
                    noise,
                }),
                ObjectiveSpec::NoiseOnly => Box::new(NoiseOnly::new(config.dim, noise.seed)),
            };
            let out = run_once(opt.as_mut(), obj.as_mut(), generations);
            record.runtime_secs = out.runtime_secs;
            record.final_clean_best = out.clean_best();
            record.generations = out.generations;
            if let Some(e) = out.error {
                return Err(e);
            }
            record.final_covariance = isotropy_check(opt.as_ref()).ok().map(Into::into);
            Ok(())
        })();
        if let Err(e) = result {
            record.status = RunStatus::Failed {
                message: e.to_string(),
            };
        }
        if let Err(e) = write_record(&path, &record) {
            record.status = RunStatus::Failed {
                message: format!("could not persist record: {e}"),
            };
        }
        (record, false)
    };

    let results: Vec<(RunRecord, bool)> = match options.threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build()
            .map_err(|e| HarnessError::Config(format!("thread pool: {e}")))?
            .install(|| cells.par_iter().map(execute).collect()),
        None => cells.par_iter().map(execute).collect(),
    };
    let resumed = results.iter().filter(|r| r.1).count();
    Ok(GridOutcome {
        records: results.into_iter().map(|r| r.0).collect(),
        out_dir,
        resumed,
    })
}

fn atomic_write(path: &Path, bytes: &[u8]) -> Result<(), HarnessError> {
    let tmp = path.with_extension("tmp");
    std::fs::write(&tmp, bytes)?;
    std::fs::rename(&tmp, path)?;
    Ok(())
}

fn write_record(path: &Path, record: &RunRecord) -> Result<(), HarnessError> {
    atomic_write(path, &serde_json::to_vec(record)?)
}

pub fn read_record(path: &Path) -> Result<RunRecord, HarnessError> {
    Ok(serde_json::from_slice(&std::fs::read(path)?)?)
}

/// Every record under `<dir>/runs`, sorted by run id.
pub fn load_records(dir: &Path) -> Result<Vec<RunRecord>, HarnessError> {
    let runs = dir.join("runs");
    let mut out = Vec::new();
    if !runs.is_dir() {
        return Ok(out);
    }
    for entry in std::fs::read_dir(&runs)? {
        let path = entry?.path();
        if path.extension().is_some_and(|e| e == "json") {
            out.push(read_record(&path)?);
        }
    }
    out.sort_by(|a, b| a.run_id.cmp(&b.run_id));
    Ok(out)
}
