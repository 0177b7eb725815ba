use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::config::PpoConfig;
use super::normalizer::RewardNormalizer;
use super::rollout::{collect_rollout, reset_envs, RolloutOptions};
use super::update::{ppo_update, PpoOptimizer, UpdateStats};
use crate::curriculum::{Curriculum, CurriculumConfig, CurriculumKind, CurriculumSnapshot};
use crate::error::{Error, Result};
use crate::nn::{ArchConfig, Checkpoint, ParameterSet, PolicyKind};
use crate::sim::{EnvConfig, VecEnv};
use crate::teacher_student::{distill, AdaptationOptimizer, DistillConfig};

/// Everything one training run depends on.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    pub env: EnvConfig,
    pub ppo: PpoConfig,
    pub arch: ArchConfig,
    pub curriculum: CurriculumConfig,
    pub curriculum_kind: CurriculumKind,
    /// `student` trains the teacher and distills the adaptation module
    /// alongside; `teacher` and `domain_randomized` skip distillation.
    pub variant: PolicyKind,
    pub distill: DistillConfig,
    pub seed: u64,
    /// Intermediate checkpoint cadence in iterations (0 = final only).
    pub checkpoint_every: u64,
    pub parallel_envs: bool,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            env: EnvConfig::default(),
            ppo: PpoConfig::default(),
            arch: ArchConfig::default(),
            curriculum: CurriculumConfig::default(),
            curriculum_kind: CurriculumKind::Grid,
            variant: PolicyKind::Student,
            distill: DistillConfig::default(),
            seed: 0,
            checkpoint_every: 0,
            parallel_envs: false,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        self.env.validate()?;
        self.ppo.validate()?;
        self.arch.validate()?;
        self.curriculum.validate()?;
        self.distill.validate()?;
        if self.arch.history_len != crate::sim::HISTORY_LEN {
            return Err(Error::InvalidConfig(format!(
                "arch.history_len must equal the simulator history ({})",
                crate::sim::HISTORY_LEN
            )));
        }
        Ok(())
    }

    /// SHA-256 of the canonical JSON form.
    pub fn hash(&self) -> String {
        let json = serde_json::to_vec(self).expect("config serializes");
        hex::encode(Sha256::digest(json))
    }

    /// Latent source PPO optimizes with.
    pub fn ppo_kind(&self) -> PolicyKind {
        match self.variant {
            PolicyKind::DomainRandomized => PolicyKind::DomainRandomized,
            _ => PolicyKind::Teacher,
        }
    }

    pub fn distills(&self) -> bool {
        self.variant == PolicyKind::Student
    }
}

/// One row of the training log.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationLog {
    pub iteration: u64,
    pub step: u64,
    pub mean_reward: f64,
    pub r_v: f64,
    pub r_w: f64,
    pub support_size: usize,
    pub episodes: u64,
    pub policy_loss: f64,
    pub value_loss: f64,
    pub entropy: f64,
    pub approx_kl: f64,
    pub clip_fraction: f64,
    pub mean_ratio: f64,
    pub distill_loss: f64,
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub params: ParameterSet<f32>,
    pub curriculum: CurriculumSnapshot,
    pub log: Vec<IterationLog>,
    /// Final checkpoints by variant (teacher, plus student when distilled,
    /// or the DR policy).
    pub checkpoints: Vec<(PolicyKind, PathBuf)>,
}

const STREAM_INIT: u64 = 0;
const STREAM_ROLLOUT: u64 = 1;
const STREAM_UPDATE: u64 = 2;
const STREAM_DISTILL: u64 = 3;

fn stream(seed: u64, s: u64) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(s);
    r
}

pub fn checkpoint_name(kind: PolicyKind) -> &'static str {
    match kind {
        PolicyKind::Teacher => "teacher.ckpt",
        PolicyKind::Student => "student.ckpt",
        PolicyKind::DomainRandomized => "dr.ckpt",
    }
}

fn final_kinds(cfg: &TrainConfig) -> Vec<PolicyKind> {
    match cfg.variant {
        PolicyKind::DomainRandomized => vec![PolicyKind::DomainRandomized],
        PolicyKind::Teacher => vec![PolicyKind::Teacher],
        PolicyKind::Student => vec![PolicyKind::Teacher, PolicyKind::Student],
    }
}

/// Trains one seed, writing `train_log.csv`, `curriculum.json`,
/// `config.json` and checkpoints into `out_dir`.
///
/// Distillation draws from its own RNG stream, so the teacher weights of a
/// `student` run equal those of a `teacher` run with the same seed.
pub fn train(cfg: &TrainConfig, out_dir: &Path, mut progress: impl FnMut(&IterationLog)) -> Result<TrainOutcome> {
    cfg.validate()?;
    std::fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let config_path = out_dir.join("config.json");
    std::fs::write(&config_path, serde_json::to_string_pretty(cfg)?).map_err(|e| Error::io(&config_path, e))?;
    let config_hash = cfg.hash();

    let env_cfg = Arc::new(cfg.env.clone());
    let ranges = cfg.env.ranges.clone();
    let mut envs = VecEnv::new(env_cfg, cfg.ppo.n_envs, cfg.seed).with_parallel(cfg.parallel_envs);
    let mut curriculum = Curriculum::new(cfg.curriculum_kind, cfg.curriculum.clone(), None)?;
    let mut params = ParameterSet::<f32>::init(&cfg.arch, &mut stream(cfg.seed, STREAM_INIT))?;
    let mut opt = PpoOptimizer::new(&params, cfg.ppo.lr);
    let mut distill_opt = AdaptationOptimizer::new(&params, cfg.distill.lr);
    let mut normalizer = RewardNormalizer::new(cfg.ppo.n_envs, cfg.ppo.gamma, cfg.ppo.normalize_rewards);
    let mut rollout_rng = stream(cfg.seed, STREAM_ROLLOUT);
    let mut update_rng = stream(cfg.seed, STREAM_UPDATE);
    let mut distill_rng = stream(cfg.seed, STREAM_DISTILL);
    reset_envs(&mut envs, &curriculum, &ranges, &mut rollout_rng)?;

    let log_path = out_dir.join("train_log.csv");
    let mut log_writer = csv::Writer::from_path(&log_path)?;
    let kind = cfg.ppo_kind();
    let iterations = cfg.ppo.iterations();
    let mut log = Vec::with_capacity(iterations as usize);
    let mut step = 0u64;
    let mut episodes = 0u64;
    for it in 0..iterations {
        let buf = collect_rollout(
            &mut envs,
            &params,
            kind,
            &mut curriculum,
            &mut normalizer,
            &ranges,
            &cfg.ppo,
            RolloutOptions::default(),
            &mut rollout_rng,
        )?;
        step += buf.len() as u64;
        episodes += buf.episodes.len() as u64;
        let stats: UpdateStats = ppo_update(&buf, &mut params, &mut opt, kind, &cfg.ppo, &mut update_rng)?;
        let distill_loss = if cfg.distills() {
            let h = buf.histories.mapv(|v| v as f32);
            let d = buf.domains.mapv(|v| v as f32);
            distill(&mut params, &mut distill_opt, h.view(), d.view(), &cfg.distill, &mut distill_rng)?
        } else {
            0.0
        };
        let row = IterationLog {
            iteration: it,
            step,
            mean_reward: buf.raw_rewards.iter().sum::<f64>() / buf.len() as f64,
            r_v: buf.mean_lin_reward,
            r_w: buf.mean_ang_reward,
            support_size: curriculum.support_size(),
            episodes,
            policy_loss: stats.policy_loss,
            value_loss: stats.value_loss,
            entropy: stats.entropy,
            approx_kl: stats.approx_kl,
            clip_fraction: stats.clip_fraction,
            mean_ratio: stats.mean_ratio,
            distill_loss,
        };
        log_writer.serialize(&row)?;
        progress(&row);
        log.push(row);
        if cfg.checkpoint_every > 0 && (it + 1) % cfg.checkpoint_every == 0 && it + 1 < iterations {
            let dir = out_dir.join("checkpoints");
            Checkpoint::new(kind, config_hash.clone(), step, cfg.arch.clone(), cfg.env.clone(), params.clone())
                .save(&dir.join(format!("iter_{:05}.ckpt", it + 1)))?;
        }
    }
    log_writer.flush().map_err(|e| Error::io(&log_path, e))?;

    let snapshot = curriculum.snapshot();
    let cur_path = out_dir.join("curriculum.json");
    std::fs::write(&cur_path, serde_json::to_string_pretty(&snapshot)?).map_err(|e| Error::io(&cur_path, e))?;
    let mut checkpoints = Vec::new();
    for k in final_kinds(cfg) {
        let path = out_dir.join(checkpoint_name(k));
        Checkpoint::new(k, config_hash.clone(), step, cfg.arch.clone(), cfg.env.clone(), params.clone()).save(&path)?;
        checkpoints.push((k, path));
    }
    Ok(TrainOutcome {
        params,
        curriculum: snapshot,
        log,
        checkpoints,
    })
}

/// Prints a one-line progress report every `every` iterations.
pub fn stderr_progress(total: u64, every: u64) -> impl FnMut(&IterationLog) {
    let start = Instant::now();
    move |row: &IterationLog| {
        if every > 0 && ((row.iteration + 1) % every == 0 || row.iteration + 1 == total) {
            let secs = start.elapsed().as_secs_f64();
            let _ = writeln!(
                std::io::stderr(),
                "iter {:>4}/{} step {:>8} reward {:.4} r_v {:.4} r_w {:.4} support {:>3} kl {:.4} clip {:.3} distill {:.4} ({:.0}s)",
                row.iteration + 1,
                total,
                row.step,
                row.mean_reward,
                row.r_v,
                row.r_w,
                row.support_size,
                row.approx_kl,
                row.clip_fraction,
                row.distill_loss,
                secs
            );
        }
    }
}
