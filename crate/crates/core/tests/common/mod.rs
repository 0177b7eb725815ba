//! Independent reference implementations shared by the property and
//! acceptance tests.
#![allow(dead_code)]

use std::collections::VecDeque;

use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use velo::curriculum::{Curriculum, CurriculumConfig, CurriculumKind, FixedSchedule, GridSpec, SamplingGrid};
use velo::metrics::TrackingHeatmap;
use velo::nn::{init_mlp, Mlp, NetworkShape};
use velo::ppo::compute_gae;
use velo::sim::{clamp_friction_cone, Command, DomainParams, PhysicsConfig};

// ---------------------------------------------------------------- gradients

fn weighted_loss(net: &Mlp<f64>, x: &Array2<f64>, w: &Array2<f64>) -> f64 {
    (net.forward(x.view()).unwrap() * w).sum()
}

fn rel_error(a: &[f64], b: &[f64]) -> f64 {
    let diff: f64 = a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt();
    let na: f64 = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb: f64 = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    let scale = na.max(nb);
    if scale < 1e-12 {
        diff
    } else {
        diff / scale
    }
}

pub fn random_shape(rng: &mut ChaCha8Rng) -> NetworkShape {
    let depth = rng.gen_range(0..=3);
    let hidden: Vec<usize> = (0..depth).map(|_| rng.gen_range(1..=12)).collect();
    NetworkShape::new(rng.gen_range(1..=8), &hidden, rng.gen_range(1..=4))
}

/// Largest per-tensor relative error between backprop and central
/// differences of a random linear functional of the output, over every
/// weight, bias and the input.
pub fn mlp_gradient_error(shape: &NetworkShape, seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut net: Mlp<f64> = init_mlp(shape, 1.0, 1.0, &mut rng).unwrap();
    for l in net.layers_mut() {
        l.bias.mapv_inplace(|_| rng.gen_range(-0.5..0.5));
    }
    let batch = rng.gen_range(1..=4);
    let x = Array2::from_shape_fn((batch, shape.input_dim), |_| rng.gen_range(-1.5..1.5));
    let w = Array2::from_shape_fn((batch, shape.output_dim), |_| rng.gen_range(-1.0..1.0));
    let (_, cache) = net.forward_recorded(x.view()).unwrap();
    let mut g = net.grads();
    let dx = net.backward(&cache, w.view(), &mut g, true).unwrap().unwrap();
    let analytic: Vec<Vec<f64>> = g.slices().iter().map(|s| s.to_vec()).collect();

    let h = 1e-6;
    let mut worst: f64 = 0.0;
    for (b, grad) in analytic.iter().enumerate() {
        let mut fd = Vec::with_capacity(grad.len());
        for i in 0..grad.len() {
            let orig = net.slices()[b][i];
            net.slices_mut()[b][i] = orig + h;
            let up = weighted_loss(&net, &x, &w);
            net.slices_mut()[b][i] = orig - h;
            let down = weighted_loss(&net, &x, &w);
            net.slices_mut()[b][i] = orig;
            fd.push((up - down) / (2.0 * h));
        }
        worst = worst.max(rel_error(grad, &fd));
    }
    let mut xp = x.clone();
    let mut fd = Vec::with_capacity(x.len());
    for r in 0..x.nrows() {
        for c in 0..x.ncols() {
            xp[[r, c]] = x[[r, c]] + h;
            let up = weighted_loss(&net, &xp, &w);
            xp[[r, c]] = x[[r, c]] - h;
            let down = weighted_loss(&net, &xp, &w);
            xp[[r, c]] = x[[r, c]];
            fd.push((up - down) / (2.0 * h));
        }
    }
    let dx: Vec<f64> = dx.iter().copied().collect();
    worst.max(rel_error(&dx, &fd))
}

// ---------------------------------------------------------------------- GAE

/// Discounted return to the end of each episode (bootstrapping an
/// unfinished tail) minus the value: GAE at lambda = 1 written out term by
/// term.
pub fn brute_force_advantages(rewards: &[f64], values: &[f64], dones: &[bool], bootstrap: f64, gamma: f64) -> Vec<f64> {
    let n = rewards.len();
    (0..n)
        .map(|t| {
            let mut ret = 0.0;
            let mut discount = 1.0;
            let mut ended = false;
            for k in t..n {
                ret += discount * rewards[k];
                discount *= gamma;
                if dones[k] {
                    ended = true;
                    break;
                }
            }
            if !ended {
                ret += discount * bootstrap;
            }
            ret - values[t]
        })
        .collect()
}

/// GAE as the explicit sum of discounted TD errors up to the episode end.
pub fn td_sum_advantages(
    rewards: &[f64],
    values: &[f64],
    dones: &[bool],
    bootstrap: f64,
    gamma: f64,
    lambda: f64,
) -> Vec<f64> {
    let n = rewards.len();
    let next_value = |k: usize| if k + 1 < n { values[k + 1] } else { bootstrap };
    (0..n)
        .map(|t| {
            let mut acc = 0.0;
            let mut w = 1.0;
            for k in t..n {
                let cont = if dones[k] { 0.0 } else { 1.0 };
                acc += w * (rewards[k] + gamma * cont * next_value(k) - values[k]);
                if dones[k] {
                    break;
                }
                w *= gamma * lambda;
            }
            acc
        })
        .collect()
}

pub struct GaeCase {
    pub rewards: Vec<f64>,
    pub values: Vec<f64>,
    pub dones: Vec<bool>,
    pub bootstrap: f64,
    pub gamma: f64,
}

pub fn random_gae_case(rng: &mut ChaCha8Rng) -> GaeCase {
    let n = rng.gen_range(1..=8);
    GaeCase {
        rewards: (0..n).map(|_| rng.gen_range(-2.0..2.0)).collect(),
        values: (0..n).map(|_| rng.gen_range(-2.0..2.0)).collect(),
        dones: (0..n).map(|_| rng.gen_bool(0.25)).collect(),
        bootstrap: rng.gen_range(-2.0..2.0),
        gamma: rng.gen_range(0.5..1.0),
    }
}

/// Largest absolute gap between `compute_gae` at lambda = 1 and the
/// brute-force returns.
pub fn gae_error(c: &GaeCase) -> f64 {
    let (adv, _) = compute_gae(&c.rewards, &c.values, &c.dones, c.bootstrap, c.gamma, 1.0).unwrap();
    let oracle = brute_force_advantages(&c.rewards, &c.values, &c.dones, c.bootstrap, c.gamma);
    adv.iter().zip(&oracle).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
}

// ----------------------------------------------------------------- friction

pub fn random_params(rng: &mut ChaCha8Rng) -> DomainParams {
    DomainParams {
        friction: rng.gen_range(0.02..2.5),
        payload_mass: rng.gen_range(-2.0..6.0),
        com_offset: [rng.gen_range(-0.1..0.1), rng.gen_range(-0.1..0.1)],
        motor_scale: rng.gen_range(0.5..1.5),
        roughness: 0.0,
    }
}

/// Checks the cone clamp of one planar force: bounded norm, unchanged
/// inside the cone, direction kept outside it.
pub fn check_friction_clamp(force: [f64; 2], params: &DomainParams, physics: &PhysicsConfig) -> Result<(), String> {
    let limit = params.friction * (physics.base_mass + params.payload_mass) * physics.gravity;
    let out = clamp_friction_cone(force, params, physics);
    let norm_in = force[0].hypot(force[1]);
    let norm_out = out[0].hypot(out[1]);
    if norm_out > limit + 1e-9 {
        return Err(format!("{force:?} -> {out:?} exceeds {limit}"));
    }
    if norm_in <= limit {
        if out != force {
            return Err(format!("{force:?} inside the cone was changed to {out:?}"));
        }
        return Ok(());
    }
    let cross = force[0] * out[1] - force[1] * out[0];
    let dot = force[0] * out[0] + force[1] * out[1];
    if cross.abs() > 1e-9 * norm_in * norm_out.max(1.0) || dot <= 0.0 {
        return Err(format!("{force:?} -> {out:?} changed direction"));
    }
    if (norm_out - limit).abs() > 1e-9 * limit.max(1.0) {
        return Err(format!("{force:?} -> {out:?} not on the cone boundary {limit}"));
    }
    Ok(())
}

// --------------------------------------------------------------- curriculum

fn four_connected(g: &SamplingGrid) -> bool {
    let spec = g.spec();
    let (nv, nw) = (spec.n_v(), spec.n_w());
    let cells = g.cells();
    let Some(start) = cells.iter().position(|&c| c) else {
        return true;
    };
    let mut seen = vec![false; cells.len()];
    let mut queue = VecDeque::from([start]);
    seen[start] = true;
    while let Some(i) = queue.pop_front() {
        let (iv, iw) = (i % nv, i / nv);
        let mut push = |v: usize, w: usize| {
            let j = w * nv + v;
            if cells[j] && !seen[j] {
                seen[j] = true;
                queue.push_back(j);
            }
        };
        if iv > 0 {
            push(iv - 1, iw);
        }
        if iv + 1 < nv {
            push(iv + 1, iw);
        }
        if iw > 0 {
            push(iv, iw - 1);
        }
        if iw + 1 < nw {
            push(iv, iw + 1);
        }
    }
    cells.iter().zip(&seen).all(|(&c, &s)| !c || s)
}

fn is_rectangle(g: &SamplingGrid) -> bool {
    let spec = g.spec();
    let nv = spec.n_v();
    let cells = g.cells();
    let rows: Vec<bool> = cells.chunks(nv).map(|r| r.iter().any(|&c| c)).collect();
    let cols: Vec<bool> = (0..nv).map(|v| cells.chunks(nv).any(|r| r[v])).collect();
    cells.chunks(nv).zip(&rows).all(|(r, &row)| r.iter().zip(&cols).all(|(&c, &col)| c == (row && col)))
}

fn superset(a: &SamplingGrid, b: &SamplingGrid) -> bool {
    a.cells().iter().zip(b.cells()).all(|(&x, &y)| x || !y)
}

fn initial_cells(cfg: &CurriculumConfig) -> SamplingGrid {
    SamplingGrid::from_box(cfg.grid, &cfg.initial_box).unwrap()
}

fn small_config(rng: &mut ChaCha8Rng) -> CurriculumConfig {
    let mut cfg = CurriculumConfig::default();
    if rng.gen_bool(0.5) {
        // a coarse grid makes the frontier reach the bounds quickly
        cfg.grid.resolution = [1.0, 1.0];
    }
    cfg.success_threshold = rng.gen_range(0.3..0.95);
    cfg
}

/// Runs one random sequence of episode outcomes through a random strategy,
/// checking the support invariants after every update.
pub fn check_curriculum_sequence(seed: u64) -> Result<(), String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let kind = [CurriculumKind::None, CurriculumKind::Fixed, CurriculumKind::Box, CurriculumKind::Grid][rng.gen_range(0..4)];
    let cfg = small_config(&mut rng);
    let schedule = (kind == CurriculumKind::Fixed).then(|| {
        FixedSchedule::linear(cfg.initial_box, cfg.wide_box, rng.gen_range(5..60), rng.gen_range(2..6)).unwrap()
    });
    let mut c = Curriculum::new(kind, cfg.clone(), schedule).map_err(|e| e.to_string())?;
    let init = initial_cells(&cfg);
    let len = rng.gen_range(1..120);
    for step in 0..len {
        let before = c.grid();
        // commands come from the curriculum itself, or anywhere in bounds
        let cmd = if rng.gen_bool(0.8) {
            c.sample(&mut rng).map_err(|e| e.to_string())?
        } else {
            let b = cfg.grid.bounds;
            Command::new(rng.gen_range(b.vx.lo..b.vx.hi), 0.0, rng.gen_range(b.wz.lo..b.wz.hi))
        };
        let (rv, rw) = (rng.gen_range(0.0..1.0), rng.gen_range(0.0..1.0));
        let mut twice = c.clone();
        c.on_episode_end(&cmd, rv, rw).map_err(|e| e.to_string())?;
        let after = c.grid();
        if !superset(&after, &before) {
            return Err(format!("{kind} support shrank at step {step}"));
        }
        if after.support_size() == 0 {
            return Err(format!("{kind} support empty"));
        }
        match kind {
            CurriculumKind::Box => {
                if !is_rectangle(&after) {
                    return Err(format!("box support not a rectangle at step {step}"));
                }
            }
            CurriculumKind::Grid => {
                if !four_connected(&after) {
                    return Err(format!("grid support disconnected at step {step}"));
                }
                if !superset(&after, &init) {
                    return Err("grid support lost the initial box".into());
                }
            }
            _ => {}
        }
        if kind != CurriculumKind::Fixed {
            // same update again: episode counters aside, nothing changes
            twice.on_episode_end(&cmd, rv, rw).map_err(|e| e.to_string())?;
            twice.on_episode_end(&cmd, rv, rw).map_err(|e| e.to_string())?;
            if twice.grid() != after {
                return Err(format!("{kind} update not idempotent at step {step}"));
            }
        }
        let probe = c.sample(&mut rng).map_err(|e| e.to_string())?;
        let (iv, iw) = (cfg.grid.v_bin(probe.vx), cfg.grid.w_bin(probe.wz));
        if !after.is_included(iv, iw) || !(cfg.lateral_range.lo..=cfg.lateral_range.hi).contains(&probe.vy) {
            return Err(format!("sampled {probe:?} outside the support"));
        }
        let p = after.probabilities();
        let total: f64 = p.iter().sum();
        if (total - 1.0).abs() > 1e-9 || p.iter().zip(after.cells()).any(|(&pi, &inc)| (pi > 0.0) != inc) {
            return Err("sampling probabilities do not match the support".into());
        }
    }
    Ok(())
}

// -------------------------------------------------------------------- areas

pub fn random_heatmap(rng: &mut ChaCha8Rng) -> TrackingHeatmap {
    let mut grid = GridSpec::default();
    grid.resolution = [[0.5, 1.0, 2.0][rng.gen_range(0..3)], [0.5, 1.0, 1.5][rng.gen_range(0..3)]];
    let n = grid.n_cells();
    let scale = rng.gen_range(0.1..2.0);
    let ev = (0..n).map(|_| rng.gen_range(0.0..scale)).collect();
    let ew = (0..n).map(|_| rng.gen_range(0.0..scale)).collect();
    TrackingHeatmap::new(grid, 5, ev, ew).unwrap()
}

/// Command area counted cell by cell from the grid geometry.
pub fn recount_area(h: &TrackingHeatmap, eps0: f64) -> f64 {
    let b = h.grid.bounds;
    let (nv, nw) = (h.grid.n_v(), h.grid.n_w());
    let dv = (b.vx.hi - b.vx.lo) / nv as f64;
    let dw = (b.wz.hi - b.wz.lo) / nw as f64;
    let mut area = 0.0;
    for iw in 0..nw {
        for iv in 0..nv {
            let (ev, ew) = h.get(iv, iw);
            if ev + ew < eps0 {
                area += dv * dw;
            }
        }
    }
    area
}
