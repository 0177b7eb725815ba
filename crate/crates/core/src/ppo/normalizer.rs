use serde::{Deserialize, Serialize};

/// Running mean/variance (parallel Welford merge).
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RunningStats {
    pub count: f64,
    pub mean: f64,
    pub m2: f64,
}

impl RunningStats {
    pub fn update(&mut self, xs: &[f64]) {
        if xs.is_empty() {
            return;
        }
        let n = xs.len() as f64;
        let mean = xs.iter().sum::<f64>() / n;
        let m2 = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>();
        let total = self.count + n;
        let delta = mean - self.mean;
        self.mean += delta * n / total;
        self.m2 += m2 + delta * delta * self.count * n / total;
        self.count = total;
    }

    pub fn var(&self) -> f64 {
        if self.count > 0.0 {
            self.m2 / self.count
        } else {
            1.0
        }
    }
}

/// Divides rewards by the running std of each env's discounted return.
/// A positive divisor keeps every reward's sign.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RewardNormalizer {
    pub enabled: bool,
    pub gamma: f64,
    returns: Vec<f64>,
    stats: RunningStats,
}

impl RewardNormalizer {
    pub fn new(n_envs: usize, gamma: f64, enabled: bool) -> Self {
        Self {
            enabled,
            gamma,
            returns: vec![0.0; n_envs],
            stats: RunningStats::default(),
        }
    }

    pub fn scale(&self) -> f64 {
        if self.enabled {
            1.0 / (self.stats.var() + 1e-8).sqrt()
        } else {
            1.0
        }
    }

    /// Updates the running return statistics with one batch step and
    /// returns the scaled rewards.
    pub fn normalize(&mut self, rewards: &[f64], dones: &[bool]) -> Vec<f64> {
        if !self.enabled {
            return rewards.to_vec();
        }
        for (g, r) in self.returns.iter_mut().zip(rewards) {
            *g = *g * self.gamma + r;
        }
        self.stats.update(&self.returns);
        for (g, d) in self.returns.iter_mut().zip(dones) {
            if *d {
                *g = 0.0;
            }
        }
        let s = self.scale();
        rewards.iter().map(|r| r * s).collect()
    }
}
