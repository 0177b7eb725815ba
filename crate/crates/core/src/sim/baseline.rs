//! Hand-written velocity tracker used as a physics reference.

use super::config::PhysicsConfig;
use super::types::{Action, Command, DomainParams};

/// Proportional tracker with drag and centripetal feed-forward. It reads
/// the true body velocity and knows the domain parameters.
#[derive(Debug, Clone, Copy)]
pub struct ProportionalController {
    pub k_lin: f64,
    pub k_yaw: f64,
}

impl Default for ProportionalController {
    fn default() -> Self {
        Self {
            k_lin: 2.0,
            k_yaw: 2.0,
        }
    }
}

impl ProportionalController {
    pub fn act(
        &self,
        vel_body: [f64; 2],
        yaw_rate: f64,
        command: Command,
        params: &DomainParams,
        physics: &PhysicsConfig,
    ) -> Action {
        let mass = params.total_mass(physics.base_mass);
        let f_scale = physics.force_max * params.motor_scale;
        let t_scale = physics.torque_max * params.motor_scale;
        let [vx, vy] = vel_body;
        // body-frame: m (dv/dt + w x v) = F - c v
        let fx = physics.lin_damping * command.vx - mass * yaw_rate * vy
            + self.k_lin * mass * (command.vx - vx);
        let fy = physics.lin_damping * command.vy + mass * yaw_rate * vx
            + self.k_lin * mass * (command.vy - vy);
        let tz = physics.rot_damping * command.wz
            + self.k_yaw * physics.inertia_z * (command.wz - yaw_rate);
        Action([fx / f_scale, fy / f_scale, tz / t_scale]).clamped()
    }
}
