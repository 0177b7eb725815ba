use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::run::{eval_dir, load_heatmap, RunManifest};
use crate::error::{Error, Result};
use crate::metrics::TrackingHeatmap;
use crate::nn::PolicyKind;

#[derive(Debug, Clone, PartialEq)]
pub struct RunResult {
    /// `<experiment>/<policy kind>`.
    pub condition: String,
    pub seed: u64,
    pub heatmap: TrackingHeatmap,
}

/// Every evaluated policy of a run directory.
pub fn load_run_results(run_dir: &Path) -> Result<Vec<RunResult>> {
    let manifest = RunManifest::load(run_dir)?;
    let mut out = Vec::new();
    for entry in &manifest.checkpoints {
        if !eval_dir(run_dir, entry.kind).join("heatmap.json").exists() {
            return Err(Error::Checkpoint(format!(
                "{} has no evaluation for {}; run eval first",
                run_dir.display(),
                entry.kind
            )));
        }
        out.push(RunResult {
            condition: condition_name(&manifest.experiment, entry.kind),
            seed: manifest.seed,
            heatmap: load_heatmap(run_dir, entry.kind)?,
        });
    }
    Ok(out)
}

pub fn condition_name(experiment: &str, kind: PolicyKind) -> String {
    format!("{experiment}/{kind}")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionSummary {
    pub condition: String,
    pub seeds: Vec<u64>,
    pub thresholds: Vec<f64>,
    pub mean: Vec<f64>,
    /// Sample standard deviation across seeds (0 for a single run).
    pub std: Vec<f64>,
}

impl ConditionSummary {
    pub fn at(&self, eps0: f64) -> Option<(f64, f64)> {
        self.thresholds
            .iter()
            .position(|t| (t - eps0).abs() < 1e-9)
            .map(|i| (self.mean[i], self.std[i]))
    }
}

pub fn mean_std(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

/// Mean ± std command area per condition. Output order is by condition
/// name, so it does not depend on the order of `results`.
pub fn compare(results: &[RunResult], thresholds: &[f64]) -> Result<Vec<ConditionSummary>> {
    let Some(first) = results.first() else {
        return Err(Error::InvalidConfig("compare needs at least one run".into()));
    };
    for r in results {
        if r.heatmap.grid != first.heatmap.grid {
            return Err(Error::GridMismatch(format!(
                "{} seed {} uses {:?}, expected {:?}",
                r.condition, r.seed, r.heatmap.grid, first.heatmap.grid
            )));
        }
    }
    let mut groups: BTreeMap<&str, Vec<&RunResult>> = BTreeMap::new();
    for r in results {
        groups.entry(r.condition.as_str()).or_default().push(r);
    }
    Ok(groups
        .into_iter()
        .map(|(name, mut runs)| {
            runs.sort_by_key(|r| r.seed);
            let (mean, std) = thresholds
                .iter()
                .map(|&e| {
                    let areas: Vec<f64> = runs.iter().map(|r| r.heatmap.command_area(e)).collect();
                    mean_std(&areas)
                })
                .unzip();
            ConditionSummary {
                condition: name.to_string(),
                seeds: runs.iter().map(|r| r.seed).collect(),
                thresholds: thresholds.to_vec(),
                mean,
                std,
            }
        })
        .collect())
}

/// `compare.csv` (one row per condition and threshold) and `compare.json`.
pub fn write_compare(summaries: &[ConditionSummary], out_dir: &Path) -> Result<()> {
    std::fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let csv_path = out_dir.join("compare.csv");
    let mut w = csv::Writer::from_path(&csv_path)?;
    w.write_record(["condition", "runs", "eps0", "area_mean", "area_std"])?;
    for s in summaries {
        for i in 0..s.thresholds.len() {
            w.write_record([
                s.condition.clone(),
                s.seeds.len().to_string(),
                format!("{}", s.thresholds[i]),
                format!("{}", s.mean[i]),
                format!("{}", s.std[i]),
            ])?;
        }
    }
    w.flush().map_err(|e| Error::io(&csv_path, e))?;
    let json_path = out_dir.join("compare.json");
    std::fs::write(&json_path, serde_json::to_string_pretty(summaries)?).map_err(|e| Error::io(&json_path, e))
}
