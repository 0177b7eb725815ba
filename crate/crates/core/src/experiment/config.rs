use std::collections::HashSet;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::curriculum::{CurriculumConfig, CurriculumKind};
use crate::error::{Error, Result};
use crate::metrics::SweepConfig;
use crate::nn::{ArchConfig, PolicyKind};
use crate::ppo::{PpoConfig, TrainConfig};
use crate::sim::{DomainParams, EnvConfig, ParamRange};
use crate::teacher_student::DistillConfig;

pub const SCHEMA_VERSION: u32 = 1;
pub const DATA_DIR_VAR: &str = "VELO_DATA_DIR";

/// Output root: `$VELO_DATA_DIR` when set, otherwise `./runs`.
pub fn data_root() -> PathBuf {
    std::env::var_os(DATA_DIR_VAR)
        .filter(|v| !v.is_empty())
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from("runs"))
}

pub fn default_thresholds() -> Vec<f64> {
    vec![0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0, 1.2, 1.5]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EvalConfig {
    pub sweep: SweepConfig,
    pub thresholds: Vec<f64>,
    /// Domain parameters every evaluation trial runs with.
    pub params: DomainParams,
}

impl Default for EvalConfig {
    fn default() -> Self {
        Self {
            sweep: SweepConfig::default(),
            thresholds: default_thresholds(),
            params: DomainParams::default(),
        }
    }
}

/// One experiment: a curriculum/variant/roughness condition over seeds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub schema_version: u32,
    pub name: String,
    pub curriculum: CurriculumKind,
    pub variant: PolicyKind,
    /// Upper end of the training disturbance-force range in newtons.
    pub roughness: f64,
    pub seeds: Vec<u64>,
    /// Relative paths resolve against the data root.
    pub output_dir: PathBuf,
    pub env: EnvConfig,
    pub ppo: PpoConfig,
    pub arch: ArchConfig,
    pub curriculum_config: CurriculumConfig,
    pub distill: DistillConfig,
    pub eval: EvalConfig,
    pub checkpoint_every: u64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            name: "grid_student".into(),
            curriculum: CurriculumKind::Grid,
            variant: PolicyKind::Student,
            roughness: 0.0,
            seeds: vec![0, 1, 2],
            output_dir: PathBuf::from("grid_student"),
            env: EnvConfig::default(),
            ppo: PpoConfig::default(),
            arch: ArchConfig::default(),
            curriculum_config: CurriculumConfig::default(),
            distill: DistillConfig::default(),
            eval: EvalConfig::default(),
            checkpoint_every: 0,
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(Error::InvalidConfig(format!(
                "schema_version {} is not supported (expected {SCHEMA_VERSION})",
                self.schema_version
            )));
        }
        if self.name.is_empty() {
            return Err(Error::InvalidConfig("experiment name must not be empty".into()));
        }
        if self.seeds.is_empty() {
            return Err(Error::InvalidConfig("at least one seed is required".into()));
        }
        let distinct: HashSet<_> = self.seeds.iter().collect();
        if distinct.len() != self.seeds.len() {
            return Err(Error::InvalidConfig("seeds must be distinct".into()));
        }
        if !(self.roughness >= 0.0 && self.roughness.is_finite()) {
            return Err(Error::InvalidConfig("roughness must be finite and >= 0".into()));
        }
        if self.eval.thresholds.iter().any(|t| !t.is_finite()) {
            return Err(Error::InvalidConfig("thresholds must be finite".into()));
        }
        self.eval.sweep.grid.validate()?;
        self.eval.sweep.trial.validate()?;
        self.train_config(self.seeds[0]).validate()
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }

    /// Training configuration of one seed.
    pub fn train_config(&self, seed: u64) -> TrainConfig {
        let mut env = self.env.clone();
        env.ranges.roughness = if self.roughness > 0.0 {
            ParamRange::new(0.0, self.roughness)
        } else {
            ParamRange::fixed(0.0)
        };
        TrainConfig {
            env,
            ppo: self.ppo.clone(),
            arch: self.arch.clone(),
            curriculum: self.curriculum_config.clone(),
            curriculum_kind: self.curriculum,
            variant: self.variant,
            distill: self.distill.clone(),
            seed,
            checkpoint_every: self.checkpoint_every,
            parallel_envs: false,
        }
    }

    pub fn output_root(&self) -> PathBuf {
        if self.output_dir.is_absolute() {
            self.output_dir.clone()
        } else {
            data_root().join(&self.output_dir)
        }
    }

    pub fn run_dir(&self, seed: u64) -> PathBuf {
        self.output_root().join(format!("seed_{seed}"))
    }
}

/// A list of experiments run together.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentMatrix {
    pub schema_version: u32,
    pub experiments: Vec<ExperimentConfig>,
}

impl ExperimentMatrix {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let m: Self = serde_json::from_str(&text)?;
        if m.schema_version != SCHEMA_VERSION {
            return Err(Error::InvalidConfig(format!("unsupported matrix schema {}", m.schema_version)));
        }
        let mut names = HashSet::new();
        for e in &m.experiments {
            e.validate()?;
            if !names.insert(e.name.clone()) {
                return Err(Error::InvalidConfig(format!("duplicate experiment name '{}'", e.name)));
            }
        }
        Ok(m)
    }
}

/// Reads either a single experiment or a matrix file.
pub fn load_experiments(path: &Path) -> Result<Vec<ExperimentConfig>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let value: serde_json::Value = serde_json::from_str(&text)?;
    if value.get("experiments").is_some() {
        Ok(ExperimentMatrix::load(path)?.experiments)
    } else {
        Ok(vec![ExperimentConfig::from_json(&text)?])
    }
}
