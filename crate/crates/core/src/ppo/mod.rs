//! On-policy rollouts, advantage estimation and the clipped PPO update.

mod config;
mod gae;
mod normalizer;
mod rollout;
mod update;

pub use config::PpoConfig;
pub use gae::{compute_gae, compute_gae_batch, normalize_advantages};
pub use normalizer::{RewardNormalizer, RunningStats};
pub use rollout::{collect_rollout, reset_envs, RolloutBuffer, RolloutOptions};
pub use update::{minibatch_loss, ppo_update, MinibatchResult, PpoOptimizer, UpdateStats};
mod train;
pub use train::{checkpoint_name, stderr_progress, train, IterationLog, TrainConfig, TrainOutcome};
