//! Stage evaluation and the locked-joint comparison.
//!
//! Repeats run in parallel; each draws its trials from its own random stream
//! so results do not depend on scheduling. Outputs are written by a single
//! caller after all repeats finish.
//!
//! Metrics CSV schema, one row per trial:
//!
//! ```text
//! model,stage,locked,repeat,trial,error,success
//! ```
//!
//! `error` is in pixels for gaze and centimetres otherwise; `success` is 0 or 1.

use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use visuomotor_core::curriculum::Stage;
use visuomotor_core::eval::{run_repeat, EvalReport, ModelSet, RepeatResult};

use crate::bundle::ModelBundle;
use crate::config::RunConfig;
use crate::{sub_seed, FormatError};

pub const CSV_HEADER: [&str; 7] = ["model", "stage", "locked", "repeat", "trial", "error", "success"];

#[derive(Debug, Clone)]
pub struct Evaluation {
    pub report: EvalReport,
    pub repeats: Vec<RepeatResult>,
}

/// Evaluates `stage` over `repeats` independent trial sets.
#[allow(clippy::too_many_arguments)]
pub fn eval_stage(
    stage: Stage,
    models: &ModelSet,
    config: &RunConfig,
    trials: usize,
    repeats: usize,
    seed: u64,
    locked: bool,
) -> Result<Evaluation, FormatError> {
    if trials == 0 || repeats == 0 {
        return Err(visuomotor_core::Error::InvalidParams("trials and repeats must be at least 1").into());
    }
    let results = (0..repeats as u64)
        .into_par_iter()
        .map(|r| run_repeat(stage, models, &config.robot, &config.curriculum, trials, seed, r, locked))
        .collect::<Result<Vec<_>, _>>()?;
    let report = EvalReport::from_repeats(stage, locked, trials, &results, config.digest())?;
    Ok(Evaluation { report, repeats: results })
}

/// Seed of the trial stream for `stage`; shared by paired evaluations.
pub fn eval_seed(config: &RunConfig, stage: Stage, locked: bool) -> u64 {
    sub_seed(config.seed, &format!("eval:{}:{}", stage.name(), if locked { "locked" } else { "free" }))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub original: EvalReport,
    pub adapted: EvalReport,
    /// Adapted minus original mean success count per repeat.
    pub verdict: f64,
}

/// Evaluates both bundles on the locked robot with identical target sequences.
pub fn compare_adaptation(
    original: &ModelBundle,
    adapted: &ModelBundle,
    trials: usize,
    repeats: usize,
    seed: u64,
) -> Result<(Comparison, [Evaluation; 2]), FormatError> {
    if original.config.robot != adapted.config.robot {
        return Err(FormatError::RobotMismatch);
    }
    let a = eval_stage(Stage::EyeHand, &original.models, &original.config, trials, repeats, seed, true)?;
    let b = eval_stage(Stage::EyeHand, &adapted.models, &adapted.config, trials, repeats, seed, true)?;
    let cmp = Comparison {
        original: a.report.clone(),
        adapted: b.report.clone(),
        verdict: b.report.successes.mean - a.report.successes.mean,
    };
    Ok((cmp, [a, b]))
}

pub fn metrics_csv(label: &str, eval: &Evaluation) -> Result<Vec<u8>, FormatError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(CSV_HEADER)?;
    for rep in &eval.repeats {
        for (i, r) in rep.results.iter().enumerate() {
            w.write_record([
                label.to_string(),
                eval.report.stage.name().to_string(),
                u8::from(eval.report.locked).to_string(),
                rep.repeat.to_string(),
                i.to_string(),
                r.error.to_string(),
                u8::from(r.success).to_string(),
            ])?;
        }
    }
    w.into_inner().map_err(|e| FormatError::Io(e.into_error()))
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
pub struct MetricRow {
    pub model: String,
    pub stage: String,
    pub locked: u8,
    pub repeat: u64,
    pub trial: usize,
    pub error: f64,
    pub success: u8,
}

pub fn read_metrics(path: &Path) -> Result<Vec<MetricRow>, FormatError> {
    let mut r = csv::Reader::from_path(path)?;
    let rows = r.deserialize().collect::<Result<Vec<MetricRow>, _>>()?;
    Ok(rows)
}

/// Directory for reports of one configuration: `<root>/<short digest>`.
pub fn report_dir(root: &Path, config: &RunConfig) -> PathBuf {
    root.join(config.short_digest())
}

/// Writes `<name>.json` and `<name>.csv` into the report directory and returns their paths.
pub fn write_evaluation(dir: &Path, name: &str, eval: &Evaluation) -> Result<[PathBuf; 2], FormatError> {
    fs::create_dir_all(dir)?;
    let json = dir.join(format!("{name}.json"));
    let csv = dir.join(format!("{name}.csv"));
    fs::write(&json, serde_json::to_string_pretty(&eval.report)? + "\n")?;
    fs::write(&csv, metrics_csv(name, eval)?)?;
    Ok([json, csv])
}

pub fn write_comparison(dir: &Path, cmp: &Comparison, evals: &[Evaluation; 2]) -> Result<Vec<PathBuf>, FormatError> {
    fs::create_dir_all(dir)?;
    let json = dir.join("compare.json");
    fs::write(&json, serde_json::to_string_pretty(cmp)? + "\n")?;
    let csv = dir.join("compare.csv");
    let mut bytes = metrics_csv("original", &evals[0])?;
    let adapted = metrics_csv("adapted", &evals[1])?;
    let body = adapted.iter().position(|&b| b == b'\n').map_or(&adapted[..], |i| &adapted[i + 1..]);
    bytes.extend_from_slice(body);
    fs::write(&csv, bytes)?;
    Ok(vec![json, csv])
}
