//! Sweep the command grid for a policy and report tracking heatmaps, the
//! command-area curve and the Froude number of the fastest tracked command.
//!
//!     cargo run --release --example evaluate -- [checkpoint.ckpt]
//!
//! Without a checkpoint the proportional tracker is evaluated instead.

use std::path::Path;

use velo::experiment::{default_thresholds, load_for_eval};
use velo::metrics::{froude, sweep_policy, SweepConfig, TrackingHeatmap};
use velo::policy::{Controller, DeployedPolicy};
use velo::sim::{DomainParams, EnvConfig, ProportionalController};

/// Leg length of the proxy's reference quadruped, metres.
const LEG_LENGTH: f64 = 0.3;

fn report(h: &TrackingHeatmap) {
    for e in default_thresholds() {
        println!("  eps0 {e:>4.1}: area {:>6.2}", h.command_area(e));
    }
    println!("  tracking error per cell, # < 0.3, + < 0.5, . < 0.8 (v across, w up):");
    for iw in (0..h.grid.n_w()).rev() {
        let row: String = (0..h.grid.n_v())
            .map(|iv| {
                let (ev, ew) = h.get(iv, iw);
                match ev + ew {
                    s if s < 0.3 => '#',
                    s if s < 0.5 => '+',
                    s if s < 0.8 => '.',
                    _ => ' ',
                }
            })
            .collect();
        println!("  |{row}|");
    }
    let top = h
        .passing(0.5)
        .into_iter()
        .map(|i| {
            let (iv, iw) = h.grid.unindex(i);
            h.grid.cell_center(iv, iw).0.abs()
        })
        .fold(0.0, f64::max);
    println!("  fastest tracked forward speed {top:.2} m/s, Froude {:.2}", froude(top, LEG_LENGTH).unwrap());
}

fn sweep(c: &dyn Controller, env: &EnvConfig) -> anyhow::Result<TrackingHeatmap> {
    Ok(sweep_policy(c, env, DomainParams::default(), &SweepConfig::default(), |done, total| {
        eprint!("\r  {done}/{total} cells");
    })?)
}

fn main() -> anyhow::Result<()> {
    let h = match std::env::args().nth(1) {
        Some(path) => {
            let ckpt = load_for_eval(Path::new(&path), None)?;
            println!("{} policy from {path}", ckpt.header.kind);
            sweep(&DeployedPolicy::from_checkpoint(&ckpt)?, &ckpt.header.env)?
        }
        None => {
            println!("proportional tracker");
            sweep(&ProportionalController::default(), &EnvConfig::default())?
        }
    };
    eprintln!();
    report(&h);
    Ok(())
}
