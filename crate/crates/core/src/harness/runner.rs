//! Drive one optimizer against one objective.

use std::time::Instant;

use super::record::GenerationRecord;
use super::HarnessError;
use crate::linalg::mean_rows;
use crate::objectives::Objective;
use crate::optimizers::AskTellOptimizer;

pub struct RunOutput {
    pub generations: Vec<GenerationRecord>,
    pub runtime_secs: f64,
    /// Set when the run stopped early; `generations` holds what completed.
    pub error: Option<HarnessError>,
}

impl RunOutput {
    pub fn clean_best(&self) -> Option<f64> {
        self.generations
            .iter()
            .flat_map(|g| g.clean.iter().cloned())
            .reduce(f64::max)
    }
}

/// Run `generations` ask/evaluate/tell cycles. Optimizers see the noisy
/// scores.
pub fn run_once(
    opt: &mut dyn AskTellOptimizer,
    obj: &mut dyn Objective,
    generations: usize,
) -> RunOutput {
    let start = Instant::now();
    let mut out = Vec::with_capacity(generations);
    let mut error = None;
    for gen in 0..generations {
        let step = (|| -> Result<GenerationRecord, HarnessError> {
            let step_size = opt.step_size();
            let codes = opt.ask()?;
            let scores = obj.evaluate(gen, &codes)?;
            let noisy: Vec<f64> = scores.iter().map(|s| s.noisy).collect();
            opt.tell(&codes, &noisy)?;
            Ok(GenerationRecord {
                mean: mean_rows(&codes),
                step_size,
                raw: scores.iter().map(|s| s.raw).collect(),
                noisy,
                clean: scores.iter().map(|s| s.clean).collect(),
            })
        })();
        match step {
            Ok(g) => out.push(g),
            Err(e) => {
                error = Some(e);
                break;
            }
        }
    }
    RunOutput {
        generations: out,
        runtime_secs: start.elapsed().as_secs_f64(),
        error,
    }
}
