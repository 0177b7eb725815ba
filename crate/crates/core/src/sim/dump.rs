//! Per-step CSV state dump for debugging.

use std::io::Write;

use serde::Serialize;

use super::env::StepInfo;
use super::types::Command;
use crate::error::Result;

#[derive(Debug, Serialize)]
pub struct DumpRow {
    pub step: usize,
    pub cmd_vx: f64,
    pub cmd_vy: f64,
    pub cmd_wz: f64,
    pub x: f64,
    pub y: f64,
    pub yaw: f64,
    pub vx: f64,
    pub vy: f64,
    pub wz: f64,
    pub force_x: f64,
    pub force_y: f64,
    pub torque: f64,
    pub r_lin: f64,
    pub r_ang: f64,
    pub r_action_rate: f64,
    pub r_wrench: f64,
    pub reward: f64,
}

impl DumpRow {
    pub fn new(step: usize, command: Command, info: &StepInfo) -> Self {
        let s = &info.state;
        let c = &info.components;
        Self {
            step,
            cmd_vx: command.vx,
            cmd_vy: command.vy,
            cmd_wz: command.wz,
            x: s.position[0],
            y: s.position[1],
            yaw: s.yaw,
            vx: s.lin_vel_body[0],
            vy: s.lin_vel_body[1],
            wz: s.yaw_rate,
            force_x: info.wrench.force[0],
            force_y: info.wrench.force[1],
            torque: info.wrench.torque,
            r_lin: c.lin,
            r_ang: c.ang,
            r_action_rate: c.action_rate,
            r_wrench: c.wrench,
            reward: c.total(),
        }
    }
}

/// CSV writer with one row per control step.
pub struct StateDump<W: Write> {
    writer: csv::Writer<W>,
}

impl<W: Write> StateDump<W> {
    pub fn new(inner: W) -> Self {
        Self {
            writer: csv::Writer::from_writer(inner),
        }
    }

    pub fn record(&mut self, row: &DumpRow) -> Result<()> {
        self.writer.serialize(row)?;
        Ok(())
    }

    pub fn finish(mut self) -> Result<W> {
        self.writer.flush().map_err(|e| crate::error::Error::io("<dump>", e))?;
        self.writer
            .into_inner()
            .map_err(|e| crate::error::Error::io("<dump>", e.into_error()))
    }
}
