use std::f64::consts::PI;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::config::DomainRanges;
use crate::error::Result;

/// Length of the observation vector.
pub const OBS_DIM: usize = 6;
/// Length of the policy input (observation plus command).
pub const INPUT_DIM: usize = 9;
pub const ACTION_DIM: usize = 3;
/// Number of scalar privileged parameters fed to the encoder.
pub const DOMAIN_DIM: usize = 6;

/// Wraps an angle to `(-pi, pi]`.
pub fn wrap_angle(a: f64) -> f64 {
    let mut w = a.rem_euclid(2.0 * PI);
    if w > PI {
        w -= 2.0 * PI;
    }
    w
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct BodyState {
    /// World-frame position, m.
    pub position: [f64; 2],
    pub yaw: f64,
    /// Body-frame velocity (forward, lateral), m/s.
    pub lin_vel_body: [f64; 2],
    pub yaw_rate: f64,
}

impl BodyState {
    pub fn is_finite(&self) -> bool {
        self.position.iter().all(|v| v.is_finite())
            && self.yaw.is_finite()
            && self.lin_vel_body.iter().all(|v| v.is_finite())
            && self.yaw_rate.is_finite()
    }

    pub fn world_velocity(&self) -> [f64; 2] {
        let (s, c) = self.yaw.sin_cos();
        let [vx, vy] = self.lin_vel_body;
        [c * vx - s * vy, s * vx + c * vy]
    }
}

/// Body velocity target `(v_x, v_y, w_z)`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Command {
    pub vx: f64,
    pub vy: f64,
    pub wz: f64,
}

impl Command {
    pub const fn new(vx: f64, vy: f64, wz: f64) -> Self {
        Self { vx, vy, wz }
    }

    pub fn is_finite(&self) -> bool {
        self.vx.is_finite() && self.vy.is_finite() && self.wz.is_finite()
    }

    pub fn to_array(self) -> [f64; 3] {
        [self.vx, self.vy, self.wz]
    }
}

/// Privileged parameters of one episode.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DomainParams {
    pub friction: f64,
    pub payload_mass: f64,
    pub com_offset: [f64; 2],
    pub motor_scale: f64,
    pub roughness: f64,
}

impl Default for DomainParams {
    /// Nominal robot on flat unit-friction ground.
    fn default() -> Self {
        Self {
            friction: 1.0,
            payload_mass: 0.0,
            com_offset: [0.0, 0.0],
            motor_scale: 1.0,
            roughness: 0.0,
        }
    }
}

impl DomainParams {
    pub fn total_mass(&self, base_mass: f64) -> f64 {
        base_mass + self.payload_mass
    }

    pub fn within(&self, ranges: &DomainRanges) -> bool {
        ranges.friction.contains(self.friction)
            && ranges.payload_mass.contains(self.payload_mass)
            && ranges.com_x.contains(self.com_offset[0])
            && ranges.com_y.contains(self.com_offset[1])
            && ranges.motor_scale.contains(self.motor_scale)
            && ranges.roughness.contains(self.roughness)
    }

    /// Encoder input: every field mapped to `[-1, 1]` over its range.
    pub fn normalized(&self, ranges: &DomainRanges) -> [f64; DOMAIN_DIM] {
        [
            ranges.friction.normalize(self.friction),
            ranges.payload_mass.normalize(self.payload_mass),
            ranges.com_x.normalize(self.com_offset[0]),
            ranges.com_y.normalize(self.com_offset[1]),
            ranges.motor_scale.normalize(self.motor_scale),
            ranges.roughness.normalize(self.roughness),
        ]
    }
}

/// Draws every field uniformly from its range. The draw order is fixed so a
/// seeded generator always yields the same parameters.
pub fn sample_domain_params<R: Rng + ?Sized>(
    rng: &mut R,
    ranges: &DomainRanges,
) -> Result<DomainParams> {
    ranges.validate()?;
    let mut draw = |r: &super::config::ParamRange| {
        if r.min == r.max {
            r.min
        } else {
            rng.gen_range(r.min..=r.max)
        }
    };
    Ok(DomainParams {
        friction: draw(&ranges.friction),
        payload_mass: draw(&ranges.payload_mass),
        com_offset: [draw(&ranges.com_x), draw(&ranges.com_y)],
        motor_scale: draw(&ranges.motor_scale),
        roughness: draw(&ranges.roughness),
    })
}

/// Normalized actuation request: longitudinal force, lateral force, yaw torque.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Action(pub [f64; ACTION_DIM]);

impl Action {
    pub fn clamped(self) -> Self {
        Action(self.0.map(|a| if a.is_nan() { 0.0 } else { a.clamp(-1.0, 1.0) }))
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|a| a.is_finite())
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Observation {
    pub lin_vel_meas: [f64; 2],
    pub yaw_rate_meas: f64,
    pub prev_action: [f64; ACTION_DIM],
}

impl Observation {
    pub fn to_array(&self) -> [f64; OBS_DIM] {
        [
            self.lin_vel_meas[0],
            self.lin_vel_meas[1],
            self.yaw_rate_meas,
            self.prev_action[0],
            self.prev_action[1],
            self.prev_action[2],
        ]
    }
}

/// Observation concatenated with the active command.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct PolicyInput {
    pub observation: Observation,
    pub command: Command,
}

impl PolicyInput {
    pub fn to_array(&self) -> [f64; INPUT_DIM] {
        let o = self.observation.to_array();
        [
            o[0],
            o[1],
            o[2],
            o[3],
            o[4],
            o[5],
            self.command.vx,
            self.command.vy,
            self.command.wz,
        ]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::config::ParamRange;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn degenerate_friction_range_is_exact() {
        let ranges = DomainRanges {
            friction: ParamRange::fixed(1.0),
            ..Default::default()
        };
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let p = sample_domain_params(&mut rng, &ranges).unwrap();
        assert_eq!(p.friction, 1.0);
    }

    #[test]
    fn default_ranges_stay_inside_table() {
        let ranges = DomainRanges::default();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..1000 {
            let p = sample_domain_params(&mut rng, &ranges).unwrap();
            assert!((0.05..=4.0).contains(&p.friction));
            assert!((-1.0..=3.0).contains(&p.payload_mass));
            assert!(p.within(&ranges));
            assert!(p.total_mass(9.0) > 0.0);
        }
    }

    #[test]
    fn same_seed_same_params() {
        let ranges = DomainRanges::default();
        let a = sample_domain_params(&mut ChaCha8Rng::seed_from_u64(5), &ranges).unwrap();
        let b = sample_domain_params(&mut ChaCha8Rng::seed_from_u64(5), &ranges).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn inverted_range_rejected() {
        let ranges = DomainRanges {
            motor_scale: ParamRange::new(1.1, 0.9),
            ..Default::default()
        };
        let err = sample_domain_params(&mut ChaCha8Rng::seed_from_u64(0), &ranges);
        assert!(err.is_err());
    }

    #[test]
    fn wrap_angle_half_open() {
        assert!((wrap_angle(PI) - PI).abs() < 1e-12);
        assert!((wrap_angle(-PI) - PI).abs() < 1e-12);
        assert!((wrap_angle(3.0 * PI / 2.0) + PI / 2.0).abs() < 1e-12);
        assert_eq!(wrap_angle(0.3), 0.3);
    }
}
