//! Planar rigid-body dynamics: actuation, the friction cone, and the
//! semi-implicit Euler substep.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::config::PhysicsConfig;
use super::types::{wrap_angle, Action, BodyState, DomainParams};

/// Planar force (body frame, N) and yaw torque about the CoM (N·m).
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct BodyWrench {
    pub force: [f64; 2],
    pub torque: f64,
}

/// z-component of `r x f`.
pub fn cross2(r: [f64; 2], f: [f64; 2]) -> f64 {
    r[0] * f[1] - r[1] * f[0]
}

/// Yaw torque about a CoM displaced by `com_offset` from the point where the
/// planar force acts.
pub fn effective_torque(yaw_torque: f64, force: [f64; 2], com_offset: [f64; 2]) -> f64 {
    yaw_torque - cross2(com_offset, force)
}

fn commanded(action: Action, params: &DomainParams, physics: &PhysicsConfig) -> ([f64; 2], f64) {
    let [a0, a1, a2] = action.clamped().0;
    // The planar force channels share one actuator budget.
    let norm = a0.hypot(a1);
    let (f0, f1) = if norm > 1.0 {
        (a0 / norm, a1 / norm)
    } else {
        (a0, a1)
    };
    let f_scale = physics.force_max * params.motor_scale;
    (
        [f0 * f_scale, f1 * f_scale],
        a2 * physics.torque_max * params.motor_scale,
    )
}

/// Desired body wrench for a normalized action, before the friction cone.
pub fn actuate(action: Action, params: &DomainParams, physics: &PhysicsConfig) -> BodyWrench {
    let (force, yaw) = commanded(action, params, physics);
    BodyWrench {
        force,
        torque: effective_torque(yaw, force, params.com_offset),
    }
}

/// Limits a planar ground force to the friction cone of radius `mu * m * g`,
/// preserving its direction.
pub fn clamp_friction_cone(force: [f64; 2], params: &DomainParams, physics: &PhysicsConfig) -> [f64; 2] {
    let limit = params.friction * params.total_mass(physics.base_mass) * physics.gravity;
    let norm = force[0].hypot(force[1]);
    if norm <= limit {
        force
    } else {
        let s = limit / norm;
        [force[0] * s, force[1] * s]
    }
}

/// Wrench actually transmitted through the ground contact.
pub fn ground_wrench(action: Action, params: &DomainParams, physics: &PhysicsConfig) -> BodyWrench {
    let (desired, yaw) = commanded(action, params, physics);
    let force = clamp_friction_cone(desired, params, physics);
    BodyWrench {
        force,
        torque: effective_torque(yaw, force, params.com_offset),
    }
}

/// Advances `state` by one substep of `physics.substep_dt`.
pub fn substep<R: Rng + ?Sized>(
    state: &mut BodyState,
    wrench: &BodyWrench,
    params: &DomainParams,
    physics: &PhysicsConfig,
    rng: &mut R,
) {
    let dt = physics.substep_dt;
    let mass = params.total_mass(physics.base_mass);
    let (s, c) = state.yaw.sin_cos();
    let [fx, fy] = wrench.force;
    let f_world = [c * fx - s * fy, s * fx + c * fy];
    let mut v = state.world_velocity();
    let (dx, dy) = if params.roughness > 0.0 {
        let nx: f64 = rng.sample(StandardNormal);
        let ny: f64 = rng.sample(StandardNormal);
        (params.roughness * nx, params.roughness * ny)
    } else {
        (0.0, 0.0)
    };
    v[0] += dt * (f_world[0] - physics.lin_damping * v[0] + dx) / mass;
    v[1] += dt * (f_world[1] - physics.lin_damping * v[1] + dy) / mass;
    state.yaw_rate +=
        dt * (wrench.torque - physics.rot_damping * state.yaw_rate) / physics.inertia_z;
    state.position[0] += dt * v[0];
    state.position[1] += dt * v[1];
    state.yaw = wrap_angle(state.yaw + dt * state.yaw_rate);
    let (s, c) = state.yaw.sin_cos();
    state.lin_vel_body = [c * v[0] + s * v[1], -s * v[0] + c * v[1]];
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn physics() -> PhysicsConfig {
        PhysicsConfig::default()
    }

    #[test]
    fn zero_action_zero_wrench() {
        let w = actuate(Action([0.0; 3]), &DomainParams::default(), &physics());
        assert_eq!(w, BodyWrench::default());
    }

    #[test]
    fn motor_scale_scales_force() {
        let p = DomainParams {
            motor_scale: 1.1,
            ..Default::default()
        };
        let w = actuate(Action([1.0, 0.0, 0.0]), &p, &physics());
        assert_abs_diff_eq!(w.force[0], 132.0, epsilon = 1e-9);
        assert_eq!(w.force[1], 0.0);
    }

    #[test]
    fn com_offset_couples_force_into_yaw() {
        let p = DomainParams {
            motor_scale: 1.1,
            com_offset: [0.0, 0.1],
            ..Default::default()
        };
        let w = actuate(Action([1.0, 0.0, 0.0]), &p, &physics());
        // r x F = r_x F_y - r_y F_x = -0.1 * 132
        assert_abs_diff_eq!(cross2(p.com_offset, w.force), -13.2, epsilon = 1e-9);
        assert_abs_diff_eq!(w.torque, 13.2, epsilon = 1e-9);
    }

    #[test]
    fn friction_cone_examples() {
        let p = DomainParams::default();
        let ph = physics();
        assert_eq!(clamp_friction_cone([50.0, 0.0], &p, &ph), [50.0, 0.0]);
        let c = clamp_friction_cone([100.0, 0.0], &p, &ph);
        assert_abs_diff_eq!(c[0], 88.29, epsilon = 1e-9);
        assert_eq!(c[1], 0.0);
        assert_eq!(clamp_friction_cone([0.0, 0.0], &p, &ph), [0.0, 0.0]);
    }

    #[test]
    fn planar_channels_share_budget() {
        let w = actuate(Action([1.0, 1.0, 0.0]), &DomainParams::default(), &physics());
        assert_abs_diff_eq!(w.force[0].hypot(w.force[1]), 120.0, epsilon = 1e-9);
    }

    #[test]
    fn out_of_range_action_is_clamped() {
        let a = actuate(Action([5.0, 0.0, -3.0]), &DomainParams::default(), &physics());
        let b = actuate(Action([1.0, 0.0, -1.0]), &DomainParams::default(), &physics());
        assert_eq!(a, b);
    }
}
