//! Load an experiment matrix, show what each run would train and, for runs
//! already trained and evaluated, the cross-seed command-area comparison.
//!
//!     cargo run --release --example experiment_matrix -- [configs/matrix.json]
//!
//! Train the matrix with `velo train configs/matrix.json --eval`.

use std::path::PathBuf;

use velo::experiment::{compare, load_experiments, load_run_results, RunManifest};

fn main() -> anyhow::Result<()> {
    let path = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| "configs/matrix.json".into()));
    let exps = load_experiments(&path)?;
    let mut results = Vec::new();
    for exp in &exps {
        let cfg = exp.train_config(exp.seeds[0]);
        println!(
            "{:<14} curriculum {:<5} variant {:<17} roughness {:>4} N  {} iterations x {} seeds",
            exp.name,
            exp.curriculum,
            exp.variant.to_string(),
            exp.roughness,
            cfg.ppo.iterations(),
            exp.seeds.len()
        );
        for &s in &exp.seeds {
            let dir = exp.run_dir(s);
            match RunManifest::load(&dir) {
                Ok(m) if m.config_hash == exp.train_config(s).hash() => match load_run_results(&dir) {
                    Ok(r) => results.extend(r),
                    Err(_) => println!("    seed {s}: trained, not evaluated"),
                },
                Ok(_) => println!("    seed {s}: {} holds a run of a different config", dir.display()),
                Err(_) => println!("    seed {s}: not trained ({})", dir.display()),
            }
        }
    }
    if results.is_empty() {
        return Ok(());
    }
    let eps = [0.3, 0.5, 0.8];
    println!("\n{:<30} {:>14} {:>14} {:>14}", "condition", "eps0 0.3", "eps0 0.5", "eps0 0.8");
    for s in compare(&results, &eps)? {
        let cells: Vec<String> = (0..eps.len()).map(|i| format!("{:.2}+-{:.2}", s.mean[i], s.std[i])).collect();
        println!("{:<30} {:>14} {:>14} {:>14}", format!("{} (n={})", s.condition, s.seeds.len()), cells[0], cells[1], cells[2]);
    }
    Ok(())
}
