//! Train a privileged teacher with PPO and the grid curriculum.
//!
//!     cargo run --release --example train_teacher -- [steps] [curriculum] [out_dir]
//!
//! A full desk-scale run is 3M steps; 300k already grows the curriculum.

use std::path::PathBuf;

use velo::curriculum::CurriculumKind;
use velo::nn::PolicyKind;
use velo::ppo::{stderr_progress, train, TrainConfig};

fn main() -> anyhow::Result<()> {
    let mut args = std::env::args().skip(1);
    let steps: u64 = args.next().map(|s| s.parse()).transpose()?.unwrap_or(300_000);
    let kind: CurriculumKind = match args.next().as_deref() {
        None | Some("grid") => CurriculumKind::Grid,
        Some("box") => CurriculumKind::Box,
        Some("none") => CurriculumKind::None,
        Some(other) => anyhow::bail!("unknown curriculum {other}"),
    };
    let out = PathBuf::from(args.next().unwrap_or_else(|| "runs/example_teacher".into()));

    let mut cfg = TrainConfig { curriculum_kind: kind, variant: PolicyKind::Teacher, ..Default::default() };
    cfg.ppo.total_steps = steps;
    let outcome = train(&cfg, &out, stderr_progress(cfg.ppo.iterations(), 10))?;
    let last = outcome.log.last().unwrap();
    println!(
        "{} iterations, mean reward {:.4}, curriculum support {} cells",
        outcome.log.len(),
        last.mean_reward,
        last.support_size
    );
    for (k, p) in &outcome.checkpoints {
        println!("{k}: {}", p.display());
    }
    Ok(())
}
