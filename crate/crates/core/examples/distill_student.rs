//! Teacher-student training: PPO on the privileged teacher with the
//! adaptation module distilled from its latent after every update, then a
//! check of how close the student's latent gets on fresh histories.
//!
//!     cargo run --release --example distill_student -- [steps] [out_dir]

use std::path::PathBuf;
use std::sync::Arc;

use ndarray::Array2;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use velo::curriculum::{Curriculum, CurriculumKind};
use velo::nn::PolicyKind;
use velo::policy::{Controller, DeployedPolicy};
use velo::ppo::{reset_envs, stderr_progress, train, TrainConfig};
use velo::sim::{VecEnv, HISTORY_LEN, INPUT_DIM};
use velo::teacher_student::adaptation_loss;

fn main() -> anyhow::Result<()> {
    let mut args = std::env::args().skip(1);
    let steps: u64 = args.next().map(|s| s.parse()).transpose()?.unwrap_or(300_000);
    let out = PathBuf::from(args.next().unwrap_or_else(|| "runs/example_student".into()));

    let mut cfg = TrainConfig { variant: PolicyKind::Student, ..Default::default() };
    cfg.ppo.total_steps = steps;
    let outcome = train(&cfg, &out, stderr_progress(cfg.ppo.iterations(), 10))?;
    let last = outcome.log.last().unwrap();
    println!("final distillation loss {:.5}", last.distill_loss);

    // roll the student out in fresh randomized environments and compare its
    // latent with the teacher's on the visited histories
    let params = outcome.params;
    let student = DeployedPolicy::new(params.clone(), PolicyKind::Student, cfg.env.ranges.clone())?;
    let env_cfg = Arc::new(cfg.env.clone());
    let mut venv = VecEnv::new(env_cfg, 64, 99);
    let curriculum = Curriculum::new(CurriculumKind::Grid, cfg.curriculum.clone(), None)?;
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    reset_envs(&mut venv, &curriculum, &cfg.env.ranges, &mut rng)?;
    for _ in 0..100 {
        let actions = student.act_batch(venv.envs())?;
        venv.batch_step(&actions)?;
    }
    let envs = venv.envs();
    let hist_dim = HISTORY_LEN * INPUT_DIM;
    let mut h = Array2::<f32>::zeros((envs.len(), hist_dim));
    let mut d = Array2::<f32>::zeros((envs.len(), params.encoder.input_dim()));
    let mut buf = vec![0.0; hist_dim];
    for (i, e) in envs.iter().enumerate() {
        e.write_history(&mut buf);
        h.row_mut(i).iter_mut().zip(&buf).for_each(|(o, v)| *o = *v as f32);
        let p = e.params().normalized(&cfg.env.ranges);
        d.row_mut(i).iter_mut().zip(p).for_each(|(o, v)| *o = v as f32);
    }
    let z = params.encoder_forward(d.view())?;
    let z_hat = params.adaptation_forward(h.view())?;
    println!("held-out latent MSE {:.5} (latent variance {:.5})", adaptation_loss(z_hat.view(), z.view())?, z.var(0.0));
    Ok(())
}
