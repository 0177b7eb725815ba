//! Grow box and grid curricula against a synthetic agent that can only
//! track commands with |v * w| below a friction limit.
//!
//!     cargo run --example curriculum -- [episodes]

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use velo::curriculum::{Curriculum, CurriculumConfig, CurriculumKind};

fn show(c: &Curriculum) {
    let g = c.grid();
    let spec = g.spec();
    for iw in (0..spec.n_w()).rev() {
        let row: String = (0..spec.n_v()).map(|iv| if g.is_included(iv, iw) { '#' } else { '.' }).collect();
        println!("  {row}");
    }
}

fn main() -> anyhow::Result<()> {
    let episodes: usize = std::env::args().nth(1).map(|s| s.parse()).transpose()?.unwrap_or(20_000);
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    for kind in [CurriculumKind::Box, CurriculumKind::Grid] {
        let mut c = Curriculum::new(kind, CurriculumConfig::default(), None)?;
        for _ in 0..episodes {
            let cmd = c.sample(&mut rng)?;
            let feasible = (cmd.vx * cmd.wz).abs() < 9.81 && cmd.vx.abs() < 5.0;
            let score = if feasible { 0.9 } else { 0.3 };
            c.on_episode_end(&cmd, score, score)?;
        }
        println!("{kind}: {} cells after {episodes} episodes (v across, w up)", c.support_size());
        show(&c);
    }
    Ok(())
}
