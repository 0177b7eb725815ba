//! Desk-scale training and evaluation of command-conditioned locomotion
//! policies: a planar friction-cone simulator, adaptive command curricula,
//! PPO with a privileged teacher and an online-identification student, and
//! command-area agility metrics.

pub mod curriculum;
pub mod error;
pub mod experiment;
pub mod metrics;
pub mod nn;
pub mod policy;
pub mod ppo;
pub mod replay;
pub mod serve;
pub mod sim;
pub mod teacher_student;

pub use error::{Error, Result};
