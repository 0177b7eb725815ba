use serde::{Deserialize, Serialize};

use super::config::RewardConfig;
use super::dynamics::BodyWrench;
use super::types::{Action, BodyState, Command};

/// Per-step reward terms. `lin` and `ang` are the tracking terms the
/// curriculum consumes.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct RewardComponents {
    pub lin: f64,
    pub ang: f64,
    pub action_rate: f64,
    pub wrench: f64,
}

impl RewardComponents {
    pub fn total(&self) -> f64 {
        self.lin + self.ang + self.action_rate + self.wrench
    }
}

pub fn compute_reward(
    state: &BodyState,
    action: &Action,
    prev_action: &Action,
    command: &Command,
    wrench: &BodyWrench,
    cfg: &RewardConfig,
) -> (f64, RewardComponents) {
    let ex = state.lin_vel_body[0] - command.vx;
    let ey = state.lin_vel_body[1] - command.vy;
    let ew = state.yaw_rate - command.wz;
    let rate: f64 = action
        .0
        .iter()
        .zip(prev_action.0.iter())
        .map(|(a, b)| (b - a) * (b - a))
        .sum();
    let effort = wrench.force[0].powi(2) + wrench.force[1].powi(2) + wrench.torque.powi(2);
    let c = RewardComponents {
        lin: cfg.w_lin * (-(ex * ex + ey * ey) / cfg.sigma_lin).exp(),
        ang: cfg.w_ang * (-(ew * ew) / cfg.sigma_ang).exp(),
        action_rate: cfg.w_action_rate * rate,
        wrench: cfg.w_wrench * effort,
    };
    (c.total(), c)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn at(vx: f64, vy: f64, wz: f64) -> BodyState {
        BodyState {
            lin_vel_body: [vx, vy],
            yaw_rate: wz,
            ..Default::default()
        }
    }

    #[test]
    fn perfect_tracking_gives_task_weights() {
        let cfg = RewardConfig::default();
        let cmd = Command::new(1.0, 0.2, -0.5);
        let (total, c) = compute_reward(
            &at(1.0, 0.2, -0.5),
            &Action::default(),
            &Action::default(),
            &cmd,
            &BodyWrench::default(),
            &cfg,
        );
        assert_abs_diff_eq!(total, 0.03, epsilon = 1e-15);
        assert_eq!(c.lin, 0.02);
        assert_eq!(c.ang, 0.01);
    }

    #[test]
    fn one_sigma_error_decays_by_e() {
        let cfg = RewardConfig::default();
        // |v - v_cmd|^2 = 0.25 = sigma_lin
        let (_, c) = compute_reward(
            &at(0.5, 0.0, 0.0),
            &Action::default(),
            &Action::default(),
            &Command::default(),
            &BodyWrench::default(),
            &cfg,
        );
        assert_abs_diff_eq!(c.lin, 0.02 * (-1.0f64).exp(), epsilon = 1e-15);
        assert_abs_diff_eq!(c.lin, 0.007358, epsilon = 1e-6);
    }

    #[test]
    fn action_rate_term() {
        let cfg = RewardConfig::default();
        let (_, c) = compute_reward(
            &BodyState::default(),
            &Action([1.0, 0.0, 0.0]),
            &Action::default(),
            &Command::default(),
            &BodyWrench::default(),
            &cfg,
        );
        assert_abs_diff_eq!(c.action_rate, -2e-4, epsilon = 1e-18);
    }
}
