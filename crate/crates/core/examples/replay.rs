//! Roll a controller through a command schedule and write the per-step
//! state to CSV.
//!
//!     cargo run --release --example replay -- [checkpoint.ckpt] [out.csv]

use std::path::Path;

use velo::experiment::load_for_eval;
use velo::policy::DeployedPolicy;
use velo::replay::{replay, ReplaySchedule, Segment};
use velo::sim::{Command, EnvConfig, ProportionalController};

fn main() -> anyhow::Result<()> {
    let mut args = std::env::args().skip(1);
    let ckpt = args.next();
    let out = args.next().unwrap_or_else(|| "replay.csv".into());
    let schedule = ReplaySchedule {
        segments: vec![
            Segment { duration: 2.0, command: Command::new(2.0, 0.0, 0.0) },
            Segment { duration: 2.0, command: Command::new(2.0, 0.0, 2.0) },
            Segment { duration: 1.0, command: Command::new(0.0, 0.0, 0.0) },
        ],
        noise_free: true,
        ..Default::default()
    };
    let file = std::io::BufWriter::new(std::fs::File::create(&out)?);
    let summary = match ckpt {
        Some(p) => {
            let c = load_for_eval(Path::new(&p), None)?;
            replay(&DeployedPolicy::from_checkpoint(&c)?, &c.header.env, &schedule, 0, file)?
        }
        None => replay(&ProportionalController::default(), &EnvConfig::default(), &schedule, 0, file)?,
    };
    println!("{} steps, total reward {:.3}, faulted {} -> {out}", summary.steps, summary.total_reward, summary.faulted);
    Ok(())
}
