//! Scripted rollouts of a controller, dumped step by step to CSV.

use std::io::Write;
use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::policy::Controller;
use crate::sim::{Command, DomainParams, DumpRow, EnvConfig, LocomotionEnv, StateDump};

/// Hold `command` for `duration` seconds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub duration: f64,
    pub command: Command,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ReplaySchedule {
    pub segments: Vec<Segment>,
    pub params: DomainParams,
    /// Turns off measurement noise.
    pub noise_free: bool,
}

impl Default for ReplaySchedule {
    fn default() -> Self {
        Self {
            segments: vec![Segment {
                duration: 5.0,
                command: Command::new(1.0, 0.0, 0.0),
            }],
            params: DomainParams::default(),
            noise_free: false,
        }
    }
}

impl ReplaySchedule {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let s: Self = serde_json::from_str(&text)?;
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        if self.segments.is_empty() {
            return Err(Error::InvalidConfig("replay schedule has no segments".into()));
        }
        for s in &self.segments {
            if !(s.duration > 0.0 && s.duration.is_finite()) || !s.command.is_finite() {
                return Err(Error::InvalidConfig("segments need a positive duration and a finite command".into()));
            }
        }
        Ok(())
    }

    /// Control steps per segment at `dt`.
    pub fn step_counts(&self, dt: f64) -> Vec<usize> {
        self.segments.iter().map(|s| (s.duration / dt).round().max(1.0) as usize).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReplaySummary {
    pub steps: usize,
    pub total_reward: f64,
    pub faulted: bool,
}

/// Runs `schedule` in one environment and writes a row per control step.
pub fn replay<C: Controller + ?Sized, W: Write>(
    controller: &C,
    env_cfg: &EnvConfig,
    schedule: &ReplaySchedule,
    seed: u64,
    out: W,
) -> Result<ReplaySummary> {
    schedule.validate()?;
    let dt = env_cfg.physics.control_dt();
    let counts = schedule.step_counts(dt);
    let mut cfg = env_cfg.clone();
    cfg.episode_length = counts.iter().sum();
    let mut env = LocomotionEnv::new(Arc::new(cfg), seed);
    env.set_noise_free(schedule.noise_free);
    env.reset(schedule.segments[0].command, schedule.params)?;

    let mut dump = StateDump::new(out);
    let mut summary = ReplaySummary {
        steps: 0,
        total_reward: 0.0,
        faulted: false,
    };
    'outer: for (seg, &n) in schedule.segments.iter().zip(&counts) {
        env.set_command(seg.command);
        for _ in 0..n {
            let action = controller.act_batch(std::slice::from_ref(&env))?[0];
            let o = env.step(action)?;
            summary.steps += 1;
            summary.total_reward += o.reward;
            dump.record(&DumpRow::new(summary.steps, seg.command, &o.info))?;
            if o.info.fault {
                summary.faulted = true;
                break 'outer;
            }
        }
    }
    dump.finish()?;
    Ok(summary)
}
