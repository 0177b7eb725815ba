//! Command curricula over the forward-velocity / yaw-rate plane.
//!
//! The plane is discretized into cells of `resolution`; a distribution is the
//! set of included cells, sampled uniformly. Supports only ever grow.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sim::Command;

/// Closed interval on one command axis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub const fn new(lo: f64, hi: f64) -> Self {
        Self { lo, hi }
    }

    pub const fn symmetric(h: f64) -> Self {
        Self { lo: -h, hi: h }
    }
}

/// Axis-aligned box in the command plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CommandBox {
    pub vx: Interval,
    pub wz: Interval,
}

impl CommandBox {
    pub const fn symmetric(v: f64, w: f64) -> Self {
        Self {
            vx: Interval::symmetric(v),
            wz: Interval::symmetric(w),
        }
    }
}

/// Discretization of the command plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub bounds: CommandBox,
    /// Cell size along (v_x, w_z).
    pub resolution: [f64; 2],
}

impl Default for GridSpec {
    fn default() -> Self {
        Self {
            bounds: CommandBox::symmetric(6.0, 6.0),
            resolution: [0.5, 0.5],
        }
    }
}

fn bin_count(iv: Interval, res: f64) -> usize {
    ((iv.hi - iv.lo) / res).round().max(0.0) as usize
}

impl GridSpec {
    pub fn n_v(&self) -> usize {
        bin_count(self.bounds.vx, self.resolution[0])
    }

    pub fn n_w(&self) -> usize {
        bin_count(self.bounds.wz, self.resolution[1])
    }

    pub fn n_cells(&self) -> usize {
        self.n_v() * self.n_w()
    }

    pub fn cell_area(&self) -> f64 {
        self.resolution[0] * self.resolution[1]
    }

    pub fn validate(&self) -> Result<()> {
        let ok = self.resolution.iter().all(|r| r.is_finite() && *r > 0.0)
            && self.bounds.vx.hi > self.bounds.vx.lo
            && self.bounds.wz.hi > self.bounds.wz.lo
            && self.n_v() >= 1
            && self.n_w() >= 1;
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidConfig(format!("invalid grid spec {self:?}")))
        }
    }

    /// Flat index, row-major with the yaw index as row.
    pub fn index(&self, iv: usize, iw: usize) -> usize {
        iw * self.n_v() + iv
    }

    pub fn unindex(&self, idx: usize) -> (usize, usize) {
        (idx % self.n_v(), idx / self.n_v())
    }

    pub fn v_bin(&self, v: f64) -> usize {
        let i = ((v - self.bounds.vx.lo) / self.resolution[0]).floor();
        (i.max(0.0) as usize).min(self.n_v() - 1)
    }

    pub fn w_bin(&self, w: f64) -> usize {
        let i = ((w - self.bounds.wz.lo) / self.resolution[1]).floor();
        (i.max(0.0) as usize).min(self.n_w() - 1)
    }

    pub fn v_edges(&self, iv: usize) -> (f64, f64) {
        let lo = self.bounds.vx.lo + iv as f64 * self.resolution[0];
        (lo, lo + self.resolution[0])
    }

    pub fn w_edges(&self, iw: usize) -> (f64, f64) {
        let lo = self.bounds.wz.lo + iw as f64 * self.resolution[1];
        (lo, lo + self.resolution[1])
    }

    pub fn cell_center(&self, iv: usize, iw: usize) -> (f64, f64) {
        let (v0, v1) = self.v_edges(iv);
        let (w0, w1) = self.w_edges(iw);
        (0.5 * (v0 + v1), 0.5 * (w0 + w1))
    }

    fn bins_of(lo_bound: f64, res: f64, n: usize, iv: Interval) -> Option<std::ops::Range<usize>> {
        const EPS: f64 = 1e-9;
        let a = ((iv.lo - lo_bound) / res + EPS).floor();
        let b = ((iv.hi - lo_bound) / res - EPS).ceil();
        if a < 0.0 || b > n as f64 || b <= a {
            return None;
        }
        Some(a as usize..b as usize)
    }

    /// Bin ranges covering `b`, or `None` when `b` leaves the grid.
    pub fn box_bins(&self, b: &CommandBox) -> Option<(std::ops::Range<usize>, std::ops::Range<usize>)> {
        let v = Self::bins_of(self.bounds.vx.lo, self.resolution[0], self.n_v(), b.vx)?;
        let w = Self::bins_of(self.bounds.wz.lo, self.resolution[1], self.n_w(), b.wz)?;
        Some((v, w))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurriculumConfig {
    /// Normalized tracking score needed to unlock neighbors.
    pub success_threshold: f64,
    pub initial_box: CommandBox,
    /// Fixed sampling box of the no-curriculum baseline.
    pub wide_box: CommandBox,
    /// Lateral command range, sampled independently of the grid.
    pub lateral_range: Interval,
    pub grid: GridSpec,
}

impl Default for CurriculumConfig {
    fn default() -> Self {
        Self {
            success_threshold: 0.8,
            initial_box: CommandBox::symmetric(1.0, 1.0),
            wide_box: CommandBox::symmetric(4.0, 5.0),
            lateral_range: Interval::symmetric(0.3),
            grid: GridSpec::default(),
        }
    }
}

impl CurriculumConfig {
    pub fn validate(&self) -> Result<()> {
        self.grid.validate()?;
        if !(self.success_threshold > 0.0 && self.success_threshold < 1.0) {
            return Err(Error::InvalidConfig("success threshold must lie in (0, 1)".into()));
        }
        if self.lateral_range.lo > self.lateral_range.hi {
            return Err(Error::InvalidConfig("lateral range inverted".into()));
        }
        if self.grid.box_bins(&self.initial_box).is_none() || self.grid.box_bins(&self.wide_box).is_none() {
            return Err(Error::BoxOutOfBounds);
        }
        Ok(())
    }
}

/// Joint inclusion mask over the command grid.
#[derive(Debug, Clone, PartialEq)]
pub struct SamplingGrid {
    spec: GridSpec,
    cells: Vec<bool>,
    included: Vec<usize>,
}

impl SamplingGrid {
    pub fn from_box(spec: GridSpec, b: &CommandBox) -> Result<Self> {
        spec.validate()?;
        let (vr, wr) = spec.box_bins(b).ok_or(Error::BoxOutOfBounds)?;
        let mut cells = vec![false; spec.n_cells()];
        for iw in wr {
            for iv in vr.clone() {
                cells[spec.index(iv, iw)] = true;
            }
        }
        Ok(Self::from_cells(spec, cells))
    }

    fn from_cells(spec: GridSpec, cells: Vec<bool>) -> Self {
        let included = cells
            .iter()
            .enumerate()
            .filter_map(|(i, &c)| c.then_some(i))
            .collect();
        Self {
            spec,
            cells,
            included,
        }
    }

    pub fn spec(&self) -> &GridSpec {
        &self.spec
    }

    pub fn cells(&self) -> &[bool] {
        &self.cells
    }

    pub fn is_included(&self, iv: usize, iw: usize) -> bool {
        self.cells[self.spec.index(iv, iw)]
    }

    /// Number of included cells, which is also the normalizing constant.
    pub fn support_size(&self) -> usize {
        self.included.len()
    }

    pub fn included(&self) -> &[usize] {
        &self.included
    }

    /// Sampling probability of each cell.
    pub fn probabilities(&self) -> Vec<f64> {
        let z = self.included.len() as f64;
        self.cells.iter().map(|&c| if c { 1.0 / z } else { 0.0 }).collect()
    }

    fn include(&mut self, iv: usize, iw: usize) {
        let idx = self.spec.index(iv, iw);
        if !self.cells[idx] {
            self.cells[idx] = true;
            let pos = self.included.partition_point(|&i| i < idx);
            self.included.insert(pos, idx);
        }
    }

    /// True when the included cells form one 4-connected component.
    pub fn is_connected(&self) -> bool {
        let Some(&start) = self.included.first() else {
            return false;
        };
        let (nv, nw) = (self.spec.n_v(), self.spec.n_w());
        let mut seen = vec![false; self.cells.len()];
        let mut stack = vec![start];
        seen[start] = true;
        let mut count = 0;
        while let Some(idx) = stack.pop() {
            count += 1;
            let (iv, iw) = self.spec.unindex(idx);
            for (dv, dw) in [(-1i64, 0i64), (1, 0), (0, -1), (0, 1)] {
                let (nv_i, nw_i) = (iv as i64 + dv, iw as i64 + dw);
                if nv_i < 0 || nw_i < 0 || nv_i >= nv as i64 || nw_i >= nw as i64 {
                    continue;
                }
                let n = self.spec.index(nv_i as usize, nw_i as usize);
                if self.cells[n] && !seen[n] {
                    seen[n] = true;
                    stack.push(n);
                }
            }
        }
        count == self.included.len()
    }

    pub fn contains_box(&self, b: &CommandBox) -> bool {
        match self.spec.box_bins(b) {
            Some((vr, wr)) => wr.into_iter().all(|iw| vr.clone().all(|iv| self.is_included(iv, iw))),
            None => false,
        }
    }

    pub fn is_superset_of(&self, other: &SamplingGrid) -> bool {
        self.cells.len() == other.cells.len()
            && self.cells.iter().zip(&other.cells).all(|(a, b)| *a || !*b)
    }
}

/// Independent inclusion masks on the two command axes.
#[derive(Debug, Clone, PartialEq)]
pub struct MarginalPair {
    spec: GridSpec,
    v: Vec<bool>,
    w: Vec<bool>,
}

impl MarginalPair {
    pub fn from_box(spec: GridSpec, b: &CommandBox) -> Result<Self> {
        spec.validate()?;
        let (vr, wr) = spec.box_bins(b).ok_or(Error::BoxOutOfBounds)?;
        let mut v = vec![false; spec.n_v()];
        let mut w = vec![false; spec.n_w()];
        vr.for_each(|i| v[i] = true);
        wr.for_each(|i| w[i] = true);
        Ok(Self { spec, v, w })
    }

    pub fn spec(&self) -> &GridSpec {
        &self.spec
    }

    pub fn v_marginal(&self) -> &[bool] {
        &self.v
    }

    pub fn w_marginal(&self) -> &[bool] {
        &self.w
    }

    /// Joint support implied by the product of the marginals.
    pub fn joint(&self) -> SamplingGrid {
        let mut cells = vec![false; self.spec.n_cells()];
        for (iw, &wi) in self.w.iter().enumerate() {
            for (iv, &vi) in self.v.iter().enumerate() {
                cells[self.spec.index(iv, iw)] = vi && wi;
            }
        }
        SamplingGrid::from_cells(self.spec, cells)
    }

    pub fn support_size(&self) -> usize {
        self.v.iter().filter(|&&b| b).count() * self.w.iter().filter(|&&b| b).count()
    }
}

fn contiguous(mask: &[bool]) -> bool {
    let first = mask.iter().position(|&b| b);
    let last = mask.iter().rposition(|&b| b);
    match (first, last) {
        (Some(a), Some(b)) => mask[a..=b].iter().all(|&x| x),
        _ => false,
    }
}

impl MarginalPair {
    /// Both marginals nonempty and contiguous.
    pub fn is_valid(&self) -> bool {
        contiguous(&self.v) && contiguous(&self.w)
    }
}

/// A distribution that command samples can be drawn from.
pub trait CommandDistribution {
    fn spec(&self) -> &GridSpec;

    /// Draws `(v_x, w_z)` uniformly over the support.
    fn sample_plane<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<(f64, f64)>;

    fn sample_command<R: Rng + ?Sized>(&self, lateral: Interval, rng: &mut R) -> Result<Command> {
        let (vx, wz) = self.sample_plane(rng)?;
        let vy = if lateral.hi > lateral.lo {
            rng.gen_range(lateral.lo..=lateral.hi)
        } else {
            lateral.lo
        };
        Ok(Command::new(vx, vy, wz))
    }
}

fn uniform_in<R: Rng + ?Sized>(rng: &mut R, (lo, hi): (f64, f64)) -> f64 {
    rng.gen_range(lo..hi)
}

impl CommandDistribution for SamplingGrid {
    fn spec(&self) -> &GridSpec {
        &self.spec
    }

    fn sample_plane<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<(f64, f64)> {
        if self.included.is_empty() {
            return Err(Error::EmptySupport);
        }
        let idx = self.included[rng.gen_range(0..self.included.len())];
        let (iv, iw) = self.spec.unindex(idx);
        let v = uniform_in(rng, self.spec.v_edges(iv));
        let w = uniform_in(rng, self.spec.w_edges(iw));
        Ok((v, w))
    }
}

impl CommandDistribution for MarginalPair {
    fn spec(&self) -> &GridSpec {
        &self.spec
    }

    fn sample_plane<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<(f64, f64)> {
        let vs: Vec<usize> = (0..self.v.len()).filter(|&i| self.v[i]).collect();
        let ws: Vec<usize> = (0..self.w.len()).filter(|&i| self.w[i]).collect();
        if vs.is_empty() || ws.is_empty() {
            return Err(Error::EmptySupport);
        }
        let iv = vs[rng.gen_range(0..vs.len())];
        let iw = ws[rng.gen_range(0..ws.len())];
        Ok((
            uniform_in(rng, self.spec.v_edges(iv)),
            uniform_in(rng, self.spec.w_edges(iw)),
        ))
    }
}

/// Leaves the distribution untouched.
pub fn no_update<D>(dist: D) -> D {
    dist
}

/// Factored update: each axis unlocks its two neighbors on success.
pub fn box_update(m: &mut MarginalPair, command: &Command, r_v: f64, r_w: f64, threshold: f64) {
    let iv = m.spec.v_bin(command.vx);
    let iw = m.spec.w_bin(command.wz);
    if r_v >= threshold && m.v[iv] {
        if iv > 0 {
            m.v[iv - 1] = true;
        }
        if iv + 1 < m.v.len() {
            m.v[iv + 1] = true;
        }
    }
    if r_w >= threshold && m.w[iw] {
        if iw > 0 {
            m.w[iw - 1] = true;
        }
        if iw + 1 < m.w.len() {
            m.w[iw + 1] = true;
        }
    }
}

/// Joint update: both scores must pass, then the 4-connected neighbors of the
/// command's cell are included.
pub fn grid_update(g: &mut SamplingGrid, command: &Command, r_v: f64, r_w: f64, threshold: f64) {
    if r_v < threshold || r_w < threshold {
        return;
    }
    let iv = g.spec.v_bin(command.vx);
    let iw = g.spec.w_bin(command.wz);
    if !g.is_included(iv, iw) {
        return;
    }
    let (nv, nw) = (g.spec.n_v(), g.spec.n_w());
    if iv > 0 {
        g.include(iv - 1, iw);
    }
    if iv + 1 < nv {
        g.include(iv + 1, iw);
    }
    if iw > 0 {
        g.include(iv, iw - 1);
    }
    if iw + 1 < nw {
        g.include(iv, iw + 1);
    }
}

/// Episode-indexed list of command boxes, each containing its predecessor.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FixedSchedule {
    /// `(first episode, box)` pairs sorted by episode.
    pub stages: Vec<(u64, CommandBox)>,
}

impl FixedSchedule {
    pub fn new(stages: Vec<(u64, CommandBox)>) -> Result<Self> {
        let s = Self { stages };
        s.validate()?;
        Ok(s)
    }

    /// Linear growth from `start` to `end` over `episodes`, in `steps` stages.
    pub fn linear(start: CommandBox, end: CommandBox, episodes: u64, steps: usize) -> Result<Self> {
        let steps = steps.max(1);
        let lerp = |a: f64, b: f64, t: f64| a + (b - a) * t;
        let stages = (0..=steps)
            .map(|k| {
                let t = k as f64 / steps as f64;
                let b = CommandBox {
                    vx: Interval::new(lerp(start.vx.lo, end.vx.lo, t), lerp(start.vx.hi, end.vx.hi, t)),
                    wz: Interval::new(lerp(start.wz.lo, end.wz.lo, t), lerp(start.wz.hi, end.wz.hi, t)),
                };
                (episodes * k as u64 / steps as u64, b)
            })
            .collect();
        Self::new(stages)
    }

    pub fn validate(&self) -> Result<()> {
        for (k, pair) in self.stages.windows(2).enumerate() {
            let ((e0, a), (e1, b)) = (&pair[0], &pair[1]);
            let grows = b.vx.lo <= a.vx.lo && b.vx.hi >= a.vx.hi && b.wz.lo <= a.wz.lo && b.wz.hi >= a.wz.hi;
            if e1 < e0 || !grows {
                return Err(Error::ShrinkingSchedule(k + 1));
            }
        }
        Ok(())
    }

    pub fn box_at(&self, episode: u64) -> Option<&CommandBox> {
        self.stages.iter().rev().find(|(e, _)| *e <= episode).map(|(_, b)| b)
    }
}

/// Sets the support to the scheduled box, never dropping included cells.
pub fn fixed_schedule_update(g: &mut SamplingGrid, episode: u64, schedule: &FixedSchedule) -> Result<()> {
    schedule.validate()?;
    let Some(b) = schedule.box_at(episode) else {
        return Ok(());
    };
    let clipped = clip_box(b, &g.spec.bounds);
    let (vr, wr) = g.spec.box_bins(&clipped).ok_or(Error::BoxOutOfBounds)?;
    for iw in wr {
        for iv in vr.clone() {
            g.include(iv, iw);
        }
    }
    Ok(())
}

fn clip_box(b: &CommandBox, bounds: &CommandBox) -> CommandBox {
    CommandBox {
        vx: Interval::new(b.vx.lo.max(bounds.vx.lo), b.vx.hi.min(bounds.vx.hi)),
        wz: Interval::new(b.wz.lo.max(bounds.wz.lo), b.wz.hi.min(bounds.wz.hi)),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CurriculumKind {
    None,
    Fixed,
    Box,
    Grid,
}

impl std::fmt::Display for CurriculumKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            CurriculumKind::None => "none",
            CurriculumKind::Fixed => "fixed",
            CurriculumKind::Box => "box",
            CurriculumKind::Grid => "grid",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Support {
    Joint(SamplingGrid),
    Factored(MarginalPair),
}

/// Curriculum state of one training run.
#[derive(Debug, Clone, PartialEq)]
pub struct Curriculum {
    kind: CurriculumKind,
    config: CurriculumConfig,
    schedule: Option<FixedSchedule>,
    support: Support,
    episodes: u64,
}

/// Builds the starting grid: exactly the cells of the initial box.
pub fn init_grid(config: &CurriculumConfig) -> Result<SamplingGrid> {
    config.validate()?;
    SamplingGrid::from_box(config.grid, &config.initial_box)
}

impl Curriculum {
    pub fn new(kind: CurriculumKind, config: CurriculumConfig, schedule: Option<FixedSchedule>) -> Result<Self> {
        config.validate()?;
        let support = match kind {
            CurriculumKind::None => Support::Joint(SamplingGrid::from_box(config.grid, &config.wide_box)?),
            CurriculumKind::Fixed | CurriculumKind::Grid => Support::Joint(init_grid(&config)?),
            CurriculumKind::Box => Support::Factored(MarginalPair::from_box(config.grid, &config.initial_box)?),
        };
        let schedule = match (kind, schedule) {
            (CurriculumKind::Fixed, Some(s)) => {
                s.validate()?;
                Some(s)
            }
            (CurriculumKind::Fixed, None) => Some(FixedSchedule::linear(
                config.initial_box,
                config.wide_box,
                2000,
                6,
            )?),
            _ => None,
        };
        let mut c = Self {
            kind,
            config,
            schedule,
            support,
            episodes: 0,
        };
        c.apply_schedule()?;
        Ok(c)
    }

    fn apply_schedule(&mut self) -> Result<()> {
        if let (Some(s), Support::Joint(g)) = (&self.schedule, &mut self.support) {
            fixed_schedule_update(g, self.episodes, s)?;
        }
        Ok(())
    }

    pub fn kind(&self) -> CurriculumKind {
        self.kind
    }

    pub fn config(&self) -> &CurriculumConfig {
        &self.config
    }

    pub fn episodes(&self) -> u64 {
        self.episodes
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<Command> {
        let lateral = self.config.lateral_range;
        match &self.support {
            Support::Joint(g) => g.sample_command(lateral, rng),
            Support::Factored(m) => m.sample_command(lateral, rng),
        }
    }

    /// Applies the strategy's update for one finished episode.
    pub fn on_episode_end(&mut self, command: &Command, lin_score: f64, ang_score: f64) -> Result<()> {
        let gamma = self.config.success_threshold;
        self.episodes += 1;
        match (&self.kind, &mut self.support) {
            (CurriculumKind::Grid, Support::Joint(g)) => grid_update(g, command, lin_score, ang_score, gamma),
            (CurriculumKind::Box, Support::Factored(m)) => box_update(m, command, lin_score, ang_score, gamma),
            (CurriculumKind::Fixed, _) => self.apply_schedule()?,
            _ => {}
        }
        Ok(())
    }

    /// Current joint support.
    pub fn grid(&self) -> SamplingGrid {
        match &self.support {
            Support::Joint(g) => g.clone(),
            Support::Factored(m) => m.joint(),
        }
    }

    pub fn marginals(&self) -> Option<&MarginalPair> {
        match &self.support {
            Support::Factored(m) => Some(m),
            Support::Joint(_) => None,
        }
    }

    pub fn support_size(&self) -> usize {
        match &self.support {
            Support::Joint(g) => g.support_size(),
            Support::Factored(m) => m.support_size(),
        }
    }

    pub fn snapshot(&self) -> CurriculumSnapshot {
        let g = self.grid();
        let bits = |m: &[bool]| m.iter().map(|&b| if b { '1' } else { '0' }).collect::<String>();
        CurriculumSnapshot {
            kind: self.kind,
            bounds: self.config.grid.bounds,
            resolution: self.config.grid.resolution,
            n_v: self.config.grid.n_v(),
            n_w: self.config.grid.n_w(),
            cells: bits(g.cells()),
            episodes: self.episodes,
            v_marginal: self.marginals().map(|m| bits(&m.v)),
            w_marginal: self.marginals().map(|m| bits(&m.w)),
        }
    }

    /// Rebuilds a curriculum from a checkpointed snapshot.
    pub fn restore(snapshot: &CurriculumSnapshot, config: CurriculumConfig, schedule: Option<FixedSchedule>) -> Result<Self> {
        let mut c = Self::new(snapshot.kind, config, schedule)?;
        let parse = |s: &str, n: usize| -> Result<Vec<bool>> {
            if s.len() != n || !s.bytes().all(|b| b == b'0' || b == b'1') {
                return Err(Error::InvalidConfig("malformed curriculum bitmap".into()));
            }
            Ok(s.bytes().map(|b| b == b'1').collect())
        };
        let spec = c.config.grid;
        c.support = match (&snapshot.v_marginal, &snapshot.w_marginal) {
            (Some(v), Some(w)) => Support::Factored(MarginalPair {
                spec,
                v: parse(v, spec.n_v())?,
                w: parse(w, spec.n_w())?,
            }),
            _ => Support::Joint(SamplingGrid::from_cells(spec, parse(&snapshot.cells, spec.n_cells())?)),
        };
        c.episodes = snapshot.episodes;
        if c.support_size() == 0 {
            return Err(Error::EmptySupport);
        }
        Ok(c)
    }
}

/// JSON form of a curriculum: bounds, resolution, flat cell bitmap (row =
/// yaw index, column = forward-velocity index) and episode counter.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurriculumSnapshot {
    pub kind: CurriculumKind,
    pub bounds: CommandBox,
    pub resolution: [f64; 2],
    pub n_v: usize,
    pub n_w: usize,
    pub cells: String,
    pub episodes: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub v_marginal: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub w_marginal: Option<String>,
}
