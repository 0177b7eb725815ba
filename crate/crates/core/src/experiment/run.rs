use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::config::{EvalConfig, ExperimentConfig};
use crate::error::{Error, Result};
use crate::metrics::{sweep_policy, HeatmapBundle, TrackingHeatmap};
use crate::nn::{Checkpoint, PolicyKind};
use crate::policy::DeployedPolicy;
use crate::ppo::{checkpoint_name, train, IterationLog, TrainOutcome};

/// Hex SHA-256 of a file's bytes.
pub fn file_sha256(path: &Path) -> Result<String> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    Ok(hex::encode(Sha256::digest(bytes)))
}

/// `run.json`: what produced a run directory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub experiment: String,
    pub seed: u64,
    pub config_hash: String,
    pub checkpoints: Vec<CheckpointEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckpointEntry {
    pub kind: PolicyKind,
    pub file: String,
    pub sha256: String,
}

impl RunManifest {
    pub fn load(run_dir: &Path) -> Result<Self> {
        let p = run_dir.join("run.json");
        let text = std::fs::read_to_string(&p).map_err(|e| Error::io(&p, e))?;
        Ok(serde_json::from_str(&text)?)
    }
}

/// Trains one seed of `exp` into its run directory.
pub fn train_seed(exp: &ExperimentConfig, seed: u64, progress: impl FnMut(&IterationLog)) -> Result<(PathBuf, TrainOutcome)> {
    exp.validate()?;
    let dir = exp.run_dir(seed);
    let cfg = exp.train_config(seed);
    let outcome = train(&cfg, &dir, progress)?;
    let exp_path = dir.join("experiment.json");
    std::fs::write(&exp_path, serde_json::to_string_pretty(exp)?).map_err(|e| Error::io(&exp_path, e))?;
    let mut entries = Vec::new();
    for (kind, path) in &outcome.checkpoints {
        entries.push(CheckpointEntry {
            kind: *kind,
            file: checkpoint_name(*kind).to_string(),
            sha256: file_sha256(path)?,
        });
    }
    let manifest = RunManifest {
        experiment: exp.name.clone(),
        seed,
        config_hash: cfg.hash(),
        checkpoints: entries,
    };
    let m_path = dir.join("run.json");
    std::fs::write(&m_path, serde_json::to_string_pretty(&manifest)?).map_err(|e| Error::io(&m_path, e))?;
    Ok((dir, outcome))
}

/// Loads a checkpoint for evaluation. A student checkpoint is only accepted
/// together with the teacher whose body it shares: `teacher` if given,
/// otherwise `teacher.ckpt` next to it.
pub fn load_for_eval(path: &Path, teacher: Option<&Path>) -> Result<Checkpoint> {
    let ckpt = Checkpoint::load(path)?;
    if ckpt.header.kind == PolicyKind::Student {
        let sibling;
        let teacher_path = match teacher {
            Some(t) => t,
            None => {
                sibling = path.with_file_name(checkpoint_name(PolicyKind::Teacher));
                &sibling
            }
        };
        if !teacher_path.exists() {
            return Err(Error::Checkpoint(format!(
                "student checkpoint needs its teacher; {} not found",
                teacher_path.display()
            )));
        }
        let t = Checkpoint::load(teacher_path)?;
        if t.header.kind != PolicyKind::Teacher {
            return Err(Error::Checkpoint(format!("{} is not a teacher checkpoint", teacher_path.display())));
        }
        ckpt.check_body(&t.header.body_hash)?;
    }
    Ok(ckpt)
}

/// Sweeps one checkpoint and writes `eps_v.csv`, `eps_w.csv` and
/// `heatmap.json` into `out_dir`.
pub fn evaluate_checkpoint(
    ckpt: &Checkpoint,
    eval: &EvalConfig,
    out_dir: &Path,
    progress: impl FnMut(usize, usize),
) -> Result<TrackingHeatmap> {
    let policy = DeployedPolicy::from_checkpoint(ckpt)?;
    let h = sweep_policy(&policy, &ckpt.header.env, eval.params, &eval.sweep, progress)?;
    h.write_csv(out_dir)?;
    h.bundle(&eval.thresholds).save(&out_dir.join("heatmap.json"))?;
    Ok(h)
}

pub fn eval_dir(run_dir: &Path, kind: PolicyKind) -> PathBuf {
    run_dir.join("eval").join(kind.to_string())
}

/// Evaluates every final checkpoint listed in a run's manifest.
pub fn evaluate_run(
    run_dir: &Path,
    eval: &EvalConfig,
    mut progress: impl FnMut(PolicyKind, usize, usize),
) -> Result<Vec<(PolicyKind, TrackingHeatmap)>> {
    let manifest = RunManifest::load(run_dir)?;
    let mut out = Vec::new();
    for entry in &manifest.checkpoints {
        let ckpt = load_for_eval(&run_dir.join(&entry.file), None)?;
        let kind = entry.kind;
        let h = evaluate_checkpoint(&ckpt, eval, &eval_dir(run_dir, kind), |d, t| progress(kind, d, t))?;
        out.push((kind, h));
    }
    Ok(out)
}

/// Heatmap previously written by [`evaluate_checkpoint`].
pub fn load_heatmap(run_dir: &Path, kind: PolicyKind) -> Result<TrackingHeatmap> {
    HeatmapBundle::load(&eval_dir(run_dir, kind).join("heatmap.json"))?.heatmap()
}

/// True when `run_dir` already holds a finished run of `exp` at `seed`
/// whose checkpoints still match the recorded hashes.
pub fn is_trained(exp: &ExperimentConfig, seed: u64) -> bool {
    let dir = exp.run_dir(seed);
    let Ok(m) = RunManifest::load(&dir) else {
        return false;
    };
    m.config_hash == exp.train_config(seed).hash()
        && !m.checkpoints.is_empty()
        && m.checkpoints
            .iter()
            .all(|c| file_sha256(&dir.join(&c.file)).is_ok_and(|h| h == c.sha256))
}

/// Trains `seed` unless an identical run is already on disk.
pub fn ensure_trained(exp: &ExperimentConfig, seed: u64, progress: impl FnMut(&IterationLog)) -> Result<PathBuf> {
    if is_trained(exp, seed) {
        return Ok(exp.run_dir(seed));
    }
    Ok(train_seed(exp, seed, progress)?.0)
}

/// `eval/<kind>/eval.json`: which checkpoint and settings a heatmap came from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalRecord {
    pub checkpoint_sha256: String,
    pub eval_hash: String,
}

pub fn eval_hash(eval: &EvalConfig) -> String {
    let json = serde_json::to_string(eval).unwrap_or_default();
    hex::encode(Sha256::digest(json.as_bytes()))
}

/// Like [`evaluate_run`], reusing heatmaps whose checkpoint and settings
/// are unchanged.
pub fn ensure_evaluated(
    run_dir: &Path,
    eval: &EvalConfig,
    mut progress: impl FnMut(PolicyKind, usize, usize),
) -> Result<Vec<(PolicyKind, TrackingHeatmap)>> {
    let manifest = RunManifest::load(run_dir)?;
    let mut out = Vec::new();
    for entry in &manifest.checkpoints {
        let dir = eval_dir(run_dir, entry.kind);
        let record = EvalRecord {
            checkpoint_sha256: entry.sha256.clone(),
            eval_hash: eval_hash(eval),
        };
        let rec_path = dir.join("eval.json");
        let cached = std::fs::read_to_string(&rec_path)
            .ok()
            .and_then(|t| serde_json::from_str::<EvalRecord>(&t).ok())
            .is_some_and(|r| r == record);
        if cached {
            if let Ok(h) = load_heatmap(run_dir, entry.kind) {
                out.push((entry.kind, h));
                continue;
            }
        }
        let ckpt = load_for_eval(&run_dir.join(&entry.file), None)?;
        let kind = entry.kind;
        let h = evaluate_checkpoint(&ckpt, eval, &dir, |d, t| progress(kind, d, t))?;
        std::fs::write(&rec_path, serde_json::to_string_pretty(&record)?).map_err(|e| Error::io(&rec_path, e))?;
        out.push((kind, h));
    }
    Ok(out)
}
