use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Closed interval `[min, max]` for a randomized quantity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ParamRange {
    pub min: f64,
    pub max: f64,
}

impl ParamRange {
    pub const fn new(min: f64, max: f64) -> Self {
        Self { min, max }
    }

    pub const fn fixed(value: f64) -> Self {
        Self {
            min: value,
            max: value,
        }
    }

    pub fn validate(&self, field: &'static str) -> Result<()> {
        if !(self.min.is_finite() && self.max.is_finite()) || self.min > self.max {
            return Err(Error::InvalidRange {
                field,
                min: self.min,
                max: self.max,
            });
        }
        Ok(())
    }

    pub fn contains(&self, x: f64) -> bool {
        x >= self.min && x <= self.max
    }

    /// Maps `x` to `[-1, 1]`; a degenerate range maps everything to 0.
    pub fn normalize(&self, x: f64) -> f64 {
        let width = self.max - self.min;
        if width <= 0.0 {
            0.0
        } else {
            2.0 * (x - self.min) / width - 1.0
        }
    }
}

/// Randomization ranges for the privileged parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DomainRanges {
    pub friction: ParamRange,
    /// kg added to the base mass.
    pub payload_mass: ParamRange,
    pub com_x: ParamRange,
    pub com_y: ParamRange,
    pub motor_scale: ParamRange,
    /// Std of the per-substep disturbance force, newtons.
    pub roughness: ParamRange,
}

impl Default for DomainRanges {
    fn default() -> Self {
        Self {
            friction: ParamRange::new(0.05, 4.0),
            payload_mass: ParamRange::new(-1.0, 3.0),
            com_x: ParamRange::new(-0.10, 0.10),
            com_y: ParamRange::new(-0.10, 0.10),
            motor_scale: ParamRange::new(0.90, 1.10),
            roughness: ParamRange::fixed(0.0),
        }
    }
}

impl DomainRanges {
    pub fn validate(&self) -> Result<()> {
        self.friction.validate("friction")?;
        self.payload_mass.validate("payload_mass")?;
        self.com_x.validate("com_x")?;
        self.com_y.validate("com_y")?;
        self.motor_scale.validate("motor_scale")?;
        self.roughness.validate("roughness")?;
        if self.roughness.min < 0.0 {
            return Err(Error::InvalidConfig("roughness must be >= 0".into()));
        }
        if self.friction.min <= 0.0 {
            return Err(Error::InvalidConfig("friction must be > 0".into()));
        }
        Ok(())
    }
}

/// Rigid-body constants of the planar proxy.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhysicsConfig {
    pub base_mass: f64,
    /// Peak planar actuation force at unit motor scale, N.
    pub force_max: f64,
    /// Peak yaw torque at unit motor scale, N·m.
    pub torque_max: f64,
    pub inertia_z: f64,
    /// Linear drag, N·s/m.
    pub lin_damping: f64,
    /// Rotational drag, N·m·s.
    pub rot_damping: f64,
    pub gravity: f64,
    pub substep_dt: f64,
    pub substeps: usize,
}

impl Default for PhysicsConfig {
    fn default() -> Self {
        Self {
            base_mass: 9.0,
            force_max: 120.0,
            torque_max: 30.0,
            inertia_z: 0.25,
            lin_damping: 6.0,
            rot_damping: 0.5,
            gravity: 9.81,
            substep_dt: 0.005,
            substeps: 4,
        }
    }
}

impl PhysicsConfig {
    pub fn control_dt(&self) -> f64 {
        self.substep_dt * self.substeps as f64
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("base_mass", self.base_mass),
            ("force_max", self.force_max),
            ("torque_max", self.torque_max),
            ("inertia_z", self.inertia_z),
            ("lin_damping", self.lin_damping),
            ("rot_damping", self.rot_damping),
            ("gravity", self.gravity),
            ("substep_dt", self.substep_dt),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidConfig(format!("{name} must be positive")));
            }
        }
        if self.substeps == 0 {
            return Err(Error::InvalidConfig("substeps must be >= 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RewardConfig {
    pub w_lin: f64,
    pub w_ang: f64,
    /// Kernel width of the xy tracking term, (m/s)^2.
    pub sigma_lin: f64,
    /// Kernel width of the yaw tracking term, (rad/s)^2.
    pub sigma_ang: f64,
    pub w_action_rate: f64,
    /// Weight on |F|^2 + tau^2 of the applied body wrench.
    pub w_wrench: f64,
}

impl Default for RewardConfig {
    fn default() -> Self {
        Self {
            w_lin: 0.02,
            w_ang: 0.01,
            sigma_lin: 0.25,
            sigma_ang: 0.25,
            w_action_rate: -2e-4,
            w_wrench: -2e-7,
        }
    }
}

impl RewardConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.w_lin > 0.0 && self.w_ang > 0.0) {
            return Err(Error::InvalidConfig("task weights must be positive".into()));
        }
        if self.w_action_rate > 0.0 || self.w_wrench > 0.0 {
            return Err(Error::InvalidConfig("penalty weights must be <= 0".into()));
        }
        if !(self.sigma_lin > 0.0 && self.sigma_ang > 0.0) {
            return Err(Error::InvalidConfig("kernel widths must be positive".into()));
        }
        Ok(())
    }
}

/// Additive Gaussian measurement noise on the velocity channels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoiseConfig {
    pub lin_vel_std: f64,
    pub yaw_rate_std: f64,
}

impl Default for NoiseConfig {
    fn default() -> Self {
        Self {
            lin_vel_std: 0.05,
            yaw_rate_std: 0.05,
        }
    }
}

impl NoiseConfig {
    pub fn disabled() -> Self {
        Self {
            lin_vel_std: 0.0,
            yaw_rate_std: 0.0,
        }
    }
}

/// Full environment configuration; this is the `env` section of the JSON
/// experiment document (see `docs/config.md`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EnvConfig {
    pub physics: PhysicsConfig,
    pub ranges: DomainRanges,
    pub reward: RewardConfig,
    pub noise: NoiseConfig,
    /// Control steps per episode.
    pub episode_length: usize,
}

impl Default for EnvConfig {
    fn default() -> Self {
        Self {
            physics: PhysicsConfig::default(),
            ranges: DomainRanges::default(),
            reward: RewardConfig::default(),
            noise: NoiseConfig::default(),
            episode_length: 500,
        }
    }
}

impl EnvConfig {
    pub fn validate(&self) -> Result<()> {
        self.physics.validate()?;
        self.ranges.validate()?;
        self.reward.validate()?;
        if self.noise.lin_vel_std < 0.0 || self.noise.yaw_rate_std < 0.0 {
            return Err(Error::InvalidConfig("noise std must be >= 0".into()));
        }
        if self.episode_length == 0 {
            return Err(Error::InvalidConfig("episode_length must be >= 1".into()));
        }
        if self.physics.base_mass + self.ranges.payload_mass.min <= 0.0 {
            return Err(Error::InvalidConfig("total mass must stay positive".into()));
        }
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }
}
