//! Tracking-error heatmaps, command area and Froude number.

use std::path::Path;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::curriculum::GridSpec;
use crate::error::{Error, Result};
use crate::policy::Controller;
use crate::sim::{env_seed, Command, DomainParams, EnvConfig, LocomotionEnv};

pub const GRAVITY: f64 = 9.81;

/// Achieved velocities of one constant-command trial after the settling
/// window.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialSeries {
    pub command: Command,
    pub vx: Vec<f64>,
    pub wz: Vec<f64>,
    /// The state went non-finite; later samples are recorded as zero.
    pub fault: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrialConfig {
    /// Control steps per trial.
    pub duration: usize,
    /// Leading steps excluded from the error.
    pub settle: usize,
}

impl Default for TrialConfig {
    fn default() -> Self {
        Self {
            duration: 250,
            settle: 50,
        }
    }
}

impl TrialConfig {
    pub fn validate(&self) -> Result<()> {
        if self.settle >= self.duration {
            return Err(Error::InvalidConfig("trial settle window must be shorter than the trial".into()));
        }
        Ok(())
    }
}

/// One trial to run: command, parameters and env seed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrialJob {
    pub command: Command,
    pub params: DomainParams,
    pub seed: u64,
}

fn eval_env_config(env: &EnvConfig, trial: &TrialConfig) -> Arc<EnvConfig> {
    let mut cfg = env.clone();
    cfg.episode_length = cfg.episode_length.max(trial.duration);
    Arc::new(cfg)
}

/// Runs every job in lock-step as one batch. Actions are the controller's
/// deterministic output; recorded velocities are the true body velocities.
pub fn run_trials<C: Controller + ?Sized>(
    controller: &C,
    env: &EnvConfig,
    trial: &TrialConfig,
    jobs: &[TrialJob],
) -> Result<Vec<TrialSeries>> {
    trial.validate()?;
    let cfg = eval_env_config(env, trial);
    let mut envs = Vec::with_capacity(jobs.len());
    for j in jobs {
        let mut e = LocomotionEnv::new(cfg.clone(), j.seed);
        e.reset(j.command, j.params)?;
        envs.push(e);
    }
    let keep = trial.duration - trial.settle;
    let mut out: Vec<TrialSeries> = jobs
        .iter()
        .map(|j| TrialSeries {
            command: j.command,
            vx: Vec::with_capacity(keep),
            wz: Vec::with_capacity(keep),
            fault: false,
        })
        .collect();
    for t in 0..trial.duration {
        let actions = controller.act_batch(&envs)?;
        for ((e, a), s) in envs.iter_mut().zip(actions).zip(out.iter_mut()) {
            if !s.fault {
                let o = e.step(a)?;
                s.fault = o.info.fault;
            }
            if t >= trial.settle {
                let (vx, wz) = if s.fault {
                    (0.0, 0.0)
                } else {
                    (e.state().lin_vel_body[0], e.state().yaw_rate)
                };
                s.vx.push(vx);
                s.wz.push(wz);
            }
        }
    }
    Ok(out)
}

/// A single trial with the command held constant.
pub fn run_tracking_trial<C: Controller + ?Sized>(
    controller: &C,
    env: &EnvConfig,
    trial: &TrialConfig,
    command: Command,
    params: DomainParams,
    seed: u64,
) -> Result<TrialSeries> {
    let mut v = run_trials(controller, env, trial, &[TrialJob { command, params, seed }])?;
    Ok(v.pop().expect("one job"))
}

fn rms(xs: &[f64], target: f64) -> f64 {
    (xs.iter().map(|x| (x - target).powi(2)).sum::<f64>() / xs.len() as f64).sqrt()
}

/// Per-trial RMS error against each trial's own command, averaged over
/// trials, for (v_x, w_z).
pub fn tracking_error_cell(series: &[TrialSeries]) -> Result<(f64, f64)> {
    if series.is_empty() || series.iter().any(|s| s.vx.is_empty() || s.wz.is_empty()) {
        return Err(Error::EmptySeries);
    }
    let n = series.len() as f64;
    let ev = series.iter().map(|s| rms(&s.vx, s.command.vx)).sum::<f64>() / n;
    let ew = series.iter().map(|s| rms(&s.wz, s.command.wz)).sum::<f64>() / n;
    Ok((ev, ew))
}

/// Fr = v² / (g l).
pub fn froude(v: f64, leg_length: f64) -> Result<f64> {
    if !(leg_length > 0.0) {
        return Err(Error::NonPositiveLegLength(leg_length));
    }
    Ok(v * v / (GRAVITY * leg_length))
}

/// RMS tracking errors over the command grid. Flat storage uses the grid's
/// index (yaw index as row).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrackingHeatmap {
    pub grid: GridSpec,
    pub trials: usize,
    pub eps_v: Vec<f64>,
    pub eps_w: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CommandAreaCurve {
    pub thresholds: Vec<f64>,
    pub areas: Vec<f64>,
}

/// Area of the cells with `eps_v + eps_w < eps0`.
pub fn command_area(h: &TrackingHeatmap, eps0: f64) -> f64 {
    h.cell_area() * h.passing(eps0).len() as f64
}

impl TrackingHeatmap {
    pub fn new(grid: GridSpec, trials: usize, eps_v: Vec<f64>, eps_w: Vec<f64>) -> Result<Self> {
        grid.validate()?;
        let n = grid.n_cells();
        if eps_v.len() != n || eps_w.len() != n {
            return Err(Error::DimensionMismatch {
                context: "heatmap cells",
                expected: n,
                actual: eps_v.len().min(eps_w.len()),
            });
        }
        if eps_v.iter().chain(&eps_w).any(|e| !e.is_finite() || *e < 0.0) {
            return Err(Error::InvalidConfig("heatmap entries must be finite and >= 0".into()));
        }
        Ok(Self { grid, trials, eps_v, eps_w })
    }

    pub fn cell_area(&self) -> f64 {
        self.grid.cell_area()
    }

    pub fn get(&self, iv: usize, iw: usize) -> (f64, f64) {
        let i = self.grid.index(iv, iw);
        (self.eps_v[i], self.eps_w[i])
    }

    /// Flat indices of cells with `eps_v + eps_w < eps0`.
    pub fn passing(&self, eps0: f64) -> Vec<usize> {
        (0..self.eps_v.len())
            .filter(|&i| self.eps_v[i] + self.eps_w[i] < eps0)
            .collect()
    }

    pub fn command_area(&self, eps0: f64) -> f64 {
        command_area(self, eps0)
    }

    pub fn area_curve(&self, thresholds: &[f64]) -> CommandAreaCurve {
        CommandAreaCurve {
            thresholds: thresholds.to_vec(),
            areas: thresholds.iter().map(|&e| self.command_area(e)).collect(),
        }
    }

    fn write_matrix(&self, path: &Path, values: &[f64]) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        let n_v = self.grid.n_v();
        for row in values.chunks(n_v) {
            w.write_record(row.iter().map(|v| format!("{v}")))?;
        }
        w.flush().map_err(|e| Error::io(path, e))
    }

    /// `eps_v.csv` and `eps_w.csv`: one row per yaw bin (ascending), one
    /// column per velocity bin (ascending).
    pub fn write_csv(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        self.write_matrix(&dir.join("eps_v.csv"), &self.eps_v)?;
        self.write_matrix(&dir.join("eps_w.csv"), &self.eps_w)
    }

    pub fn bundle(&self, thresholds: &[f64]) -> HeatmapBundle {
        let n_v = self.grid.n_v();
        HeatmapBundle {
            grid: self.grid,
            trials: self.trials,
            eps_v: self.eps_v.chunks(n_v).map(<[f64]>::to_vec).collect(),
            eps_w: self.eps_w.chunks(n_v).map(<[f64]>::to_vec).collect(),
            area_curve: self.area_curve(thresholds),
        }
    }
}

/// JSON export: heatmaps as row-per-yaw-bin matrices plus the area curve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HeatmapBundle {
    pub grid: GridSpec,
    pub trials: usize,
    pub eps_v: Vec<Vec<f64>>,
    pub eps_w: Vec<Vec<f64>>,
    pub area_curve: CommandAreaCurve,
}

impl HeatmapBundle {
    pub fn heatmap(&self) -> Result<TrackingHeatmap> {
        TrackingHeatmap::new(
            self.grid,
            self.trials,
            self.eps_v.concat(),
            self.eps_w.concat(),
        )
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Ok(serde_json::from_str(&text)?)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, serde_json::to_string_pretty(self)?).map_err(|e| Error::io(path, e))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SweepConfig {
    pub grid: GridSpec,
    pub trials_per_cell: usize,
    pub trial: TrialConfig,
    pub seed: u64,
    /// Cells simulated together in one batch.
    pub cells_per_batch: usize,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            grid: GridSpec::default(),
            trials_per_cell: 5,
            trial: TrialConfig::default(),
            seed: 0,
            cells_per_batch: 144,
        }
    }
}

/// Trial commands for one cell, uniform inside it, lateral command zero.
/// Each cell owns its RNG stream, so results do not depend on batching.
pub fn cell_jobs(cfg: &SweepConfig, cell: usize, params: DomainParams) -> Vec<TrialJob> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(cell as u64 + 1);
    let (iv, iw) = cfg.grid.unindex(cell);
    let (v0, v1) = cfg.grid.v_edges(iv);
    let (w0, w1) = cfg.grid.w_edges(iw);
    (0..cfg.trials_per_cell)
        .map(|k| TrialJob {
            command: Command::new(rng.gen_range(v0..v1), 0.0, rng.gen_range(w0..w1)),
            params,
            seed: env_seed(cfg.seed ^ 0x5eed_5eed, cell * cfg.trials_per_cell + k),
        })
        .collect()
}

/// Full tracking-error heatmap for `controller` under fixed evaluation
/// parameters. `progress(done, total)` is called after every batch.
pub fn sweep_policy<C: Controller + ?Sized>(
    controller: &C,
    env: &EnvConfig,
    params: DomainParams,
    cfg: &SweepConfig,
    mut progress: impl FnMut(usize, usize),
) -> Result<TrackingHeatmap> {
    cfg.grid.validate()?;
    if cfg.trials_per_cell == 0 || cfg.cells_per_batch == 0 {
        return Err(Error::InvalidConfig("trials_per_cell and cells_per_batch must be >= 1".into()));
    }
    let n = cfg.grid.n_cells();
    let mut eps_v = vec![0.0; n];
    let mut eps_w = vec![0.0; n];
    let cells: Vec<usize> = (0..n).collect();
    for chunk in cells.chunks(cfg.cells_per_batch) {
        let jobs: Vec<TrialJob> = chunk.iter().flat_map(|&c| cell_jobs(cfg, c, params)).collect();
        let series = run_trials(controller, env, &cfg.trial, &jobs)?;
        for (&c, s) in chunk.iter().zip(series.chunks(cfg.trials_per_cell)) {
            let (ev, ew) = tracking_error_cell(s)?;
            eps_v[c] = ev;
            eps_w[c] = ew;
        }
        progress(chunk[chunk.len() - 1] + 1, n);
    }
    TrackingHeatmap::new(cfg.grid, cfg.trials_per_cell, eps_v, eps_w)
}
