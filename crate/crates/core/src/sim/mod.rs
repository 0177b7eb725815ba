//! Planar quadruped proxy: a rigid body driven by a friction-limited ground
//! wrench, stepped at 50 Hz with four physics substeps.

mod baseline;
mod config;
mod dump;
mod dynamics;
mod env;
mod reward;
mod types;
mod vec_env;

pub use baseline::ProportionalController;
pub use config::{DomainRanges, EnvConfig, NoiseConfig, ParamRange, PhysicsConfig, RewardConfig};
pub use dump::{DumpRow, StateDump};
pub use dynamics::{
    actuate, clamp_friction_cone, cross2, effective_torque, ground_wrench, substep, BodyWrench,
};
pub use env::{EpisodeSummary, LocomotionEnv, StepInfo, StepOutcome, HISTORY_LEN};
pub use reward::{compute_reward, RewardComponents};
pub use types::{
    sample_domain_params, wrap_angle, Action, BodyState, Command, DomainParams, Observation,
    PolicyInput, ACTION_DIM, DOMAIN_DIM, INPUT_DIM, OBS_DIM,
};
pub use vec_env::{env_seed, BatchStep, VecEnv};
