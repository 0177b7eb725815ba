use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PpoConfig {
    pub gamma: f64,
    pub gae_lambda: f64,
    pub steps_per_rollout: usize,
    pub epochs: usize,
    pub minibatches: usize,
    pub entropy_coef: f64,
    pub value_coef: f64,
    pub clip: f64,
    pub lr: f64,
    pub max_grad_norm: f64,
    pub n_envs: usize,
    pub total_steps: u64,
    pub normalize_rewards: bool,
    pub normalize_advantages: bool,
    /// Adds `gamma * V(final state)` to the last reward of episodes cut by the
    /// time limit.
    pub bootstrap_timeouts: bool,
}

impl Default for PpoConfig {
    fn default() -> Self {
        Self {
            gamma: 0.99,
            gae_lambda: 0.95,
            steps_per_rollout: 21,
            epochs: 5,
            minibatches: 4,
            entropy_coef: 0.01,
            value_coef: 1.0,
            clip: 0.2,
            lr: 1e-3,
            max_grad_norm: 1.0,
            n_envs: 256,
            total_steps: 3_000_000,
            normalize_rewards: true,
            normalize_advantages: true,
            bootstrap_timeouts: true,
        }
    }
}

impl PpoConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidConfig(m.to_string()));
        if !(self.gamma > 0.0 && self.gamma < 1.0) {
            return bad("gamma must be in (0, 1)");
        }
        if !(0.0..=1.0).contains(&self.gae_lambda) {
            return bad("gae_lambda must be in [0, 1]");
        }
        if !(self.clip > 0.0) {
            return bad("clip must be > 0");
        }
        if self.epochs * self.minibatches == 0 {
            return bad("epochs * minibatches must be >= 1");
        }
        if self.steps_per_rollout == 0 || self.n_envs == 0 {
            return bad("steps_per_rollout and n_envs must be >= 1");
        }
        if self.minibatches > self.batch_size() {
            return bad("more minibatches than samples per rollout");
        }
        if !(self.lr >= 0.0) || !(self.max_grad_norm > 0.0) {
            return bad("lr must be >= 0 and max_grad_norm > 0");
        }
        if !self.entropy_coef.is_finite() || !self.value_coef.is_finite() {
            return bad("loss coefficients must be finite");
        }
        Ok(())
    }

    pub fn batch_size(&self) -> usize {
        self.steps_per_rollout * self.n_envs
    }

    /// Number of collect/update cycles needed to reach `total_steps`.
    pub fn iterations(&self) -> u64 {
        let b = self.batch_size() as u64;
        self.total_steps.div_ceil(b).max(1)
    }
}
