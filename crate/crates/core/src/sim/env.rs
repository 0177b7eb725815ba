use std::collections::VecDeque;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::config::EnvConfig;
use super::dynamics::{ground_wrench, substep, BodyWrench};
use super::reward::{compute_reward, RewardComponents};
use super::types::{Action, BodyState, Command, DomainParams, Observation, PolicyInput, INPUT_DIM};
use crate::error::{Error, Result};

/// Number of past policy inputs fed to the adaptation module.
pub const HISTORY_LEN: usize = 15;

/// Episode statistics emitted on the terminal step.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpisodeSummary {
    pub command: Command,
    /// Mean per-step xy tracking reward divided by its weight, in (0, 1].
    pub lin_score: f64,
    /// Mean per-step yaw tracking reward divided by its weight, in (0, 1].
    pub ang_score: f64,
    pub length: usize,
    pub total_reward: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepInfo {
    pub components: RewardComponents,
    /// Noise-free state after the step.
    pub state: BodyState,
    /// Wrench transmitted through the ground during the step.
    pub wrench: BodyWrench,
    pub fault: bool,
    pub episode: Option<EpisodeSummary>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepOutcome {
    pub observation: Observation,
    pub reward: f64,
    pub done: bool,
    pub info: StepInfo,
}

/// One planar locomotion environment with its own RNG stream.
#[derive(Debug, Clone)]
pub struct LocomotionEnv {
    cfg: Arc<EnvConfig>,
    rng: ChaCha8Rng,
    state: BodyState,
    params: DomainParams,
    command: Command,
    prev_action: Action,
    observation: Observation,
    history: VecDeque<[f64; INPUT_DIM]>,
    steps: usize,
    done: bool,
    noise_free: bool,
    lin_sum: f64,
    ang_sum: f64,
    reward_sum: f64,
}

impl LocomotionEnv {
    pub fn new(cfg: Arc<EnvConfig>, seed: u64) -> Self {
        Self {
            cfg,
            rng: ChaCha8Rng::seed_from_u64(seed),
            state: BodyState::default(),
            params: DomainParams::default(),
            command: Command::default(),
            prev_action: Action::default(),
            observation: Observation::default(),
            history: VecDeque::with_capacity(HISTORY_LEN),
            steps: 0,
            // must be reset before stepping
            done: true,
            noise_free: false,
            lin_sum: 0.0,
            ang_sum: 0.0,
            reward_sum: 0.0,
        }
    }

    pub fn config(&self) -> &EnvConfig {
        &self.cfg
    }

    /// Disables measurement noise (debug mode).
    pub fn set_noise_free(&mut self, on: bool) {
        self.noise_free = on;
    }

    pub fn reset(&mut self, command: Command, params: DomainParams) -> Result<Observation> {
        if !command.is_finite() {
            return Err(Error::InvalidConfig("command must be finite".into()));
        }
        if params.total_mass(self.cfg.physics.base_mass) <= 0.0 || params.friction <= 0.0 {
            return Err(Error::InvalidConfig("domain params give non-physical body".into()));
        }
        self.state = BodyState::default();
        self.params = params;
        self.command = command;
        self.prev_action = Action::default();
        self.steps = 0;
        self.done = false;
        self.lin_sum = 0.0;
        self.ang_sum = 0.0;
        self.reward_sum = 0.0;
        self.observation = self.measure();
        let x = self.policy_input().to_array();
        self.history.clear();
        self.history.extend(std::iter::repeat(x).take(HISTORY_LEN));
        Ok(self.observation)
    }

    fn measure(&mut self) -> Observation {
        let noise = &self.cfg.noise;
        let draw = |std: f64, rng: &mut ChaCha8Rng| {
            if std > 0.0 {
                let n: f64 = rng.sample(StandardNormal);
                std * n
            } else {
                0.0
            }
        };
        let (n0, n1, n2) = if self.noise_free {
            (0.0, 0.0, 0.0)
        } else {
            let a = draw(noise.lin_vel_std, &mut self.rng);
            let b = draw(noise.lin_vel_std, &mut self.rng);
            let c = draw(noise.yaw_rate_std, &mut self.rng);
            (a, b, c)
        };
        Observation {
            lin_vel_meas: [self.state.lin_vel_body[0] + n0, self.state.lin_vel_body[1] + n1],
            yaw_rate_meas: self.state.yaw_rate + n2,
            prev_action: self.prev_action.0,
        }
    }

    /// Observation with the noise removed.
    pub fn observation_noise_free(&self) -> Observation {
        Observation {
            lin_vel_meas: self.state.lin_vel_body,
            yaw_rate_meas: self.state.yaw_rate,
            prev_action: self.prev_action.0,
        }
    }

    pub fn observation(&self) -> Observation {
        self.observation
    }

    pub fn policy_input(&self) -> PolicyInput {
        PolicyInput {
            observation: self.observation,
            command: self.command,
        }
    }

    /// Past policy inputs, oldest first, most recent last.
    pub fn history(&self) -> impl Iterator<Item = &[f64; INPUT_DIM]> {
        self.history.iter()
    }

    /// Writes the flattened history (`HISTORY_LEN * INPUT_DIM` values) into `out`.
    pub fn write_history(&self, out: &mut [f64]) {
        for (chunk, x) in out.chunks_exact_mut(INPUT_DIM).zip(self.history.iter()) {
            chunk.copy_from_slice(x);
        }
    }

    pub fn state(&self) -> &BodyState {
        &self.state
    }

    pub fn params(&self) -> &DomainParams {
        &self.params
    }

    pub fn command(&self) -> Command {
        self.command
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn is_done(&self) -> bool {
        self.done
    }

    /// Changes the active command mid-episode (teleop).
    pub fn set_command(&mut self, command: Command) {
        if command.is_finite() {
            self.command = command;
        }
    }

    /// Overrides the domain parameters mid-episode (teleop what-if).
    pub fn set_params(&mut self, params: DomainParams) -> Result<()> {
        if params.total_mass(self.cfg.physics.base_mass) <= 0.0 || params.friction <= 0.0 {
            return Err(Error::InvalidConfig("domain params give non-physical body".into()));
        }
        self.params = params;
        Ok(())
    }

    pub fn step(&mut self, action: Action) -> Result<StepOutcome> {
        if self.done {
            return Err(Error::InvalidConfig("step called on a finished episode; reset first".into()));
        }
        let action = action.clamped();
        let physics = &self.cfg.physics;
        let wrench = ground_wrench(action, &self.params, physics);
        for _ in 0..physics.substeps {
            substep(&mut self.state, &wrench, &self.params, physics, &mut self.rng);
        }
        let x_prev = self.policy_input().to_array();
        self.steps += 1;

        if !self.state.is_finite() {
            self.done = true;
            let info = StepInfo {
                components: RewardComponents::default(),
                state: self.state,
                wrench,
                fault: true,
                episode: Some(self.summary()),
            };
            return Ok(StepOutcome {
                observation: self.observation,
                reward: 0.0,
                done: true,
                info,
            });
        }

        let (reward, components) = compute_reward(
            &self.state,
            &action,
            &self.prev_action,
            &self.command,
            &wrench,
            &self.cfg.reward,
        );
        self.lin_sum += components.lin;
        self.ang_sum += components.ang;
        self.reward_sum += reward;

        self.history.pop_front();
        self.history.push_back(x_prev);
        self.prev_action = action;
        self.observation = self.measure();

        self.done = self.steps >= self.cfg.episode_length;
        let info = StepInfo {
            components,
            state: self.state,
            wrench,
            fault: false,
            episode: self.done.then(|| self.summary()),
        };
        Ok(StepOutcome {
            observation: self.observation,
            reward,
            done: self.done,
            info,
        })
    }

    fn summary(&self) -> EpisodeSummary {
        let n = self.steps.max(1) as f64;
        EpisodeSummary {
            command: self.command,
            lin_score: self.lin_sum / n / self.cfg.reward.w_lin,
            ang_score: self.ang_sum / n / self.cfg.reward.w_ang,
            length: self.steps,
            total_reward: self.reward_sum,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::config::{NoiseConfig, ParamRange};
    use approx::assert_abs_diff_eq;

    fn env(seed: u64) -> LocomotionEnv {
        LocomotionEnv::new(Arc::new(EnvConfig::default()), seed)
    }

    #[test]
    fn reset_starts_at_rest() {
        let mut e = env(1);
        e.reset(Command::new(2.0, 0.0, 0.0), DomainParams::default()).unwrap();
        assert_eq!(e.observation_noise_free().lin_vel_meas, [0.0, 0.0]);
        assert_eq!(e.policy_input().command, Command::new(2.0, 0.0, 0.0));
        assert_eq!(e.steps(), 0);
        let x0 = e.policy_input().to_array();
        assert_eq!(e.history().count(), HISTORY_LEN);
        assert!(e.history().all(|x| *x == x0));
    }

    #[test]
    fn reset_is_deterministic() {
        let mut a = env(9);
        let mut b = env(9);
        let oa = a.reset(Command::new(1.0, 0.0, 0.5), DomainParams::default()).unwrap();
        let ob = b.reset(Command::new(1.0, 0.0, 0.5), DomainParams::default()).unwrap();
        assert_eq!(oa, ob);
    }

    #[test]
    fn zero_action_keeps_equilibrium() {
        let mut e = env(2);
        e.reset(Command::default(), DomainParams::default()).unwrap();
        let out = e.step(Action::default()).unwrap();
        assert_eq!(out.info.state, BodyState::default());
        assert_abs_diff_eq!(out.reward, 0.03, epsilon = 1e-15);
    }

    #[test]
    fn terminal_velocity_matches_drag_balance() {
        let cfg = EnvConfig {
            episode_length: 2000,
            ..Default::default()
        };
        let mut e = LocomotionEnv::new(Arc::new(cfg), 0);
        let p = DomainParams {
            friction: 4.0,
            ..Default::default()
        };
        e.reset(Command::default(), p).unwrap();
        for _ in 0..1500 {
            e.step(Action([1.0, 0.0, 0.0])).unwrap();
        }
        // F_max * motor_scale / c_lin = 120 / 6
        assert_abs_diff_eq!(e.state().lin_vel_body[0], 20.0, epsilon = 1e-3);
    }

    #[test]
    fn episode_ends_at_length_with_summary() {
        let cfg = EnvConfig {
            episode_length: 5,
            ..Default::default()
        };
        let mut e = LocomotionEnv::new(Arc::new(cfg), 0);
        e.reset(Command::default(), DomainParams::default()).unwrap();
        for i in 0..5 {
            let out = e.step(Action::default()).unwrap();
            assert_eq!(out.done, i == 4);
            if out.done {
                let s = out.info.episode.unwrap();
                assert_eq!(s.length, 5);
                assert_abs_diff_eq!(s.lin_score, 1.0, epsilon = 1e-12);
            }
        }
        assert!(e.step(Action::default()).is_err());
    }

    #[test]
    fn history_shifts_most_recent_last() {
        let cfg = EnvConfig {
            noise: NoiseConfig::disabled(),
            ..Default::default()
        };
        let mut e = LocomotionEnv::new(Arc::new(cfg), 0);
        e.reset(Command::new(1.0, 0.0, 0.0), DomainParams::default()).unwrap();
        let x0 = e.policy_input().to_array();
        e.step(Action([0.5, 0.0, 0.0])).unwrap();
        let x1 = e.policy_input().to_array();
        e.step(Action([0.5, 0.0, 0.0])).unwrap();
        let h: Vec<_> = e.history().copied().collect();
        assert_eq!(h[HISTORY_LEN - 1], x1);
        assert_eq!(h[HISTORY_LEN - 2], x0);
    }

    #[test]
    fn roughness_perturbs_motion() {
        let cfg = EnvConfig {
            ranges: crate::sim::DomainRanges {
                roughness: ParamRange::new(0.0, 50.0),
                ..Default::default()
            },
            ..Default::default()
        };
        let mut e = LocomotionEnv::new(Arc::new(cfg), 4);
        let p = DomainParams {
            roughness: 50.0,
            ..Default::default()
        };
        e.reset(Command::default(), p).unwrap();
        let out = e.step(Action::default()).unwrap();
        assert!(out.info.state.lin_vel_body[0] != 0.0);
    }
}
