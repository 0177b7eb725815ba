//! Drive the planar proxy with the hand-written proportional tracker and
//! watch the friction cone cap a fast turn.
//!
//!     cargo run --example simulate -- [friction]

use std::sync::Arc;

use velo::policy::Controller;
use velo::sim::{Command, DomainParams, EnvConfig, LocomotionEnv, ProportionalController};

fn main() -> anyhow::Result<()> {
    let friction: f64 = std::env::args().nth(1).map(|s| s.parse()).transpose()?.unwrap_or(1.0);
    let cfg = Arc::new(EnvConfig::default());
    let controller = ProportionalController::default();
    let params = DomainParams { friction, ..Default::default() };

    println!("friction {friction}: mu*g = {:.2} bounds |v * w|", friction * cfg.physics.gravity);
    println!("{:>6} {:>6} {:>8} {:>8} {:>8}", "vx", "wz", "vx_end", "wz_end", "|v*w|");
    for (vx, wz) in [(1.0, 0.0), (3.0, 0.0), (2.0, 2.0), (3.0, 3.0), (4.0, 4.0)] {
        let mut env = LocomotionEnv::new(cfg.clone(), 0);
        env.set_noise_free(true);
        env.reset(Command::new(vx, 0.0, wz), params)?;
        for _ in 0..250 {
            let a = controller.act_batch(std::slice::from_ref(&env))?[0];
            env.step(a)?;
        }
        let s = env.state();
        println!(
            "{vx:>6.1} {wz:>6.1} {:>8.3} {:>8.3} {:>8.2}",
            s.lin_vel_body[0],
            s.yaw_rate,
            (s.lin_vel_body[0] * s.yaw_rate).abs()
        );
    }
    Ok(())
}
