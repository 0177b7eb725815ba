use ndarray::{Array1, Array2, ArrayView2, Axis};
use rand::Rng;
use rand_distr::StandardNormal;

use super::config::PpoConfig;
use super::gae::compute_gae_batch;
use super::normalizer::RewardNormalizer;
use crate::curriculum::Curriculum;
use crate::error::Result;
use crate::nn::{gaussian_log_prob, ParameterSet, PolicyKind, Real};
use crate::sim::{
    sample_domain_params, Action, DomainRanges, EpisodeSummary, VecEnv, ACTION_DIM, DOMAIN_DIM, INPUT_DIM,
};
use crate::policy::{gather_inputs, InputBatch};
use crate::teacher_student::policy_latent;

/// One rollout of `steps × envs` transitions, flattened row-major
/// (row `t * envs + i`).
#[derive(Debug, Clone, PartialEq)]
pub struct RolloutBuffer {
    pub steps: usize,
    pub envs: usize,
    pub inputs: Array2<f64>,
    pub domains: Array2<f64>,
    pub histories: Array2<f64>,
    pub latents: Array2<f64>,
    pub actions: Array2<f64>,
    pub log_probs: Vec<f64>,
    pub values: Vec<f64>,
    /// Rewards the optimizer sees (scaled, timeouts bootstrapped).
    pub rewards: Vec<f64>,
    pub raw_rewards: Vec<f64>,
    pub dones: Vec<bool>,
    pub bootstrap: Vec<f64>,
    pub advantages: Vec<f64>,
    pub returns: Vec<f64>,
    /// Episodes finished during this rollout, in (step, env) order.
    pub episodes: Vec<EpisodeSummary>,
    /// Per-step means of the lin/ang tracking reward terms.
    pub mean_lin_reward: f64,
    pub mean_ang_reward: f64,
}

impl RolloutBuffer {
    pub fn len(&self) -> usize {
        self.steps * self.envs
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn compute_advantages(&mut self, gamma: f64, lambda: f64) -> Result<()> {
        let (a, r) = compute_gae_batch(&self.rewards, &self.values, &self.dones, &self.bootstrap, gamma, lambda)?;
        self.advantages = a;
        self.returns = r;
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct RolloutOptions {
    /// Act with the mean action (no exploration noise).
    pub deterministic: bool,
}

/// Starts every env on a fresh episode drawn from the curriculum.
pub fn reset_envs<R: Rng + ?Sized>(
    envs: &mut VecEnv,
    curriculum: &Curriculum,
    ranges: &DomainRanges,
    rng: &mut R,
) -> Result<()> {
    for i in 0..envs.len() {
        let cmd = curriculum.sample(rng)?;
        let p = sample_domain_params(rng, ranges)?;
        envs.env_mut(i).reset(cmd, p)?;
    }
    Ok(())
}

fn to_f64<T: Real>(a: &Array2<T>) -> Array2<f64> {
    a.mapv(|v| v.as_f64())
}

/// Policy latents and value estimates for `x`, evaluated in `T`.
fn latent_and_value<T: Real>(
    params: &ParameterSet<T>,
    kind: PolicyKind,
    b: &InputBatch<T>,
) -> Result<(Array2<T>, Array1<T>)> {
    let z = policy_latent(params, kind, b.d.view(), b.h.view())?;
    let v = params.value_forward(b.x.view(), z.view())?;
    Ok((z, v))
}

/// Runs `cfg.steps_per_rollout` batched steps with the current policy.
///
/// Finished episodes update the curriculum in env-index order, then the env
/// restarts with a freshly sampled command and domain parameters.
#[allow(clippy::too_many_arguments)]
pub fn collect_rollout<T: Real, R: Rng + ?Sized>(
    envs: &mut VecEnv,
    params: &ParameterSet<T>,
    kind: PolicyKind,
    curriculum: &mut Curriculum,
    normalizer: &mut RewardNormalizer,
    ranges: &DomainRanges,
    cfg: &PpoConfig,
    opts: RolloutOptions,
    rng: &mut R,
) -> Result<RolloutBuffer> {
    let n = envs.len();
    let steps = cfg.steps_per_rollout;
    let rows = n * steps;
    let hist_dim = params.adaptation.input_dim();
    let latent_dim = params.latent_dim();
    let mut buf = RolloutBuffer {
        steps,
        envs: n,
        inputs: Array2::zeros((rows, INPUT_DIM)),
        domains: Array2::zeros((rows, DOMAIN_DIM)),
        histories: Array2::zeros((rows, hist_dim)),
        latents: Array2::zeros((rows, latent_dim)),
        actions: Array2::zeros((rows, ACTION_DIM)),
        log_probs: vec![0.0; rows],
        values: vec![0.0; rows],
        rewards: vec![0.0; rows],
        raw_rewards: vec![0.0; rows],
        dones: vec![false; rows],
        bootstrap: vec![0.0; n],
        advantages: Vec::new(),
        returns: Vec::new(),
        episodes: Vec::new(),
        mean_lin_reward: 0.0,
        mean_ang_reward: 0.0,
    };
    let log_std: Vec<f64> = params.log_std.iter().map(|v| v.as_f64()).collect();
    let std: Vec<f64> = log_std.iter().map(|v| v.exp()).collect();
    let episode_length = envs.envs().first().map_or(0, |e| e.config().episode_length);

    for t in 0..steps {
        let b = gather_inputs::<T>(envs.envs(), ranges, hist_dim);
        let (z, v) = latent_and_value(params, kind, &b)?;
        let mean = params.policy_forward(b.x.view(), z.view())?;
        let rs = t * n..(t + 1) * n;
        buf.inputs.slice_mut(ndarray::s![rs.clone(), ..]).assign(&to_f64(&b.x));
        buf.domains.slice_mut(ndarray::s![rs.clone(), ..]).assign(&to_f64(&b.d));
        buf.histories.slice_mut(ndarray::s![rs.clone(), ..]).assign(&to_f64(&b.h));
        buf.latents.slice_mut(ndarray::s![rs.clone(), ..]).assign(&to_f64(&z));

        let mut actions = Vec::with_capacity(n);
        for i in 0..n {
            let mu: Vec<f64> = mean.row(i).iter().map(|m| m.as_f64()).collect();
            let mut a = [0.0; ACTION_DIM];
            for k in 0..ACTION_DIM {
                a[k] = if opts.deterministic {
                    mu[k]
                } else {
                    let e: f64 = rng.sample(StandardNormal);
                    mu[k] + std[k] * e
                };
            }
            let row = t * n + i;
            buf.log_probs[row] = gaussian_log_prob(&mu, &log_std, &a);
            buf.values[row] = v[i].as_f64();
            for k in 0..ACTION_DIM {
                buf.actions[[row, k]] = a[k];
            }
            actions.push(Action(a));
        }

        let out = envs.batch_step(&actions)?;
        let mut scaled = normalizer.normalize(&out.rewards, &out.dones);

        let timeouts: Vec<usize> = (0..n)
            .filter(|&i| {
                cfg.bootstrap_timeouts
                    && out.dones[i]
                    && !out.infos[i].fault
                    && out.infos[i].episode.as_ref().is_some_and(|e| e.length >= episode_length)
            })
            .collect();
        if !timeouts.is_empty() {
            let after = gather_inputs::<T>(envs.envs(), ranges, hist_dim);
            let x = after.x.select(Axis(0), &timeouts);
            let zt = z.select(Axis(0), &timeouts);
            let vt = params.value_forward(x.view(), zt.view())?;
            for (k, &i) in timeouts.iter().enumerate() {
                scaled[i] += cfg.gamma * vt[k].as_f64();
            }
        }

        for i in 0..n {
            let row = t * n + i;
            buf.rewards[row] = scaled[i];
            buf.raw_rewards[row] = out.rewards[i];
            buf.dones[row] = out.dones[i];
            buf.mean_lin_reward += out.infos[i].components.lin;
            buf.mean_ang_reward += out.infos[i].components.ang;
        }
        for (i, info) in out.infos.iter().enumerate() {
            if let Some(ep) = &info.episode {
                curriculum.on_episode_end(&ep.command, ep.lin_score, ep.ang_score)?;
                buf.episodes.push(ep.clone());
                let cmd = curriculum.sample(rng)?;
                let p = sample_domain_params(rng, ranges)?;
                envs.env_mut(i).reset(cmd, p)?;
            }
        }
    }
    buf.mean_lin_reward /= rows as f64;
    buf.mean_ang_reward /= rows as f64;

    let b = gather_inputs::<T>(envs.envs(), ranges, hist_dim);
    let (_, v) = latent_and_value(params, kind, &b)?;
    buf.bootstrap = v.iter().map(|x| x.as_f64()).collect();
    buf.compute_advantages(cfg.gamma, cfg.gae_lambda)?;
    Ok(buf)
}

/// Rows of `a` as a `T` matrix.
pub(crate) fn select_as<T: Real>(a: ArrayView2<f64>, rows: &[usize]) -> Array2<T> {
    let mut out = Array2::zeros((rows.len(), a.ncols()));
    for (k, &r) in rows.iter().enumerate() {
        for (j, v) in a.row(r).iter().enumerate() {
            out[[k, j]] = T::of(*v);
        }
    }
    out
}
