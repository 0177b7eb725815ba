use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};

use velo::experiment::{
    compare, ensure_evaluated, ensure_trained, evaluate_checkpoint, load_experiments, load_for_eval,
    load_run_results, train_seed, write_compare, EvalConfig, ExperimentConfig, DATA_DIR_VAR,
};
use velo::policy::DeployedPolicy;
use velo::ppo::stderr_progress;
use velo::replay::{replay, ReplaySchedule};
use velo::serve::{spawn_server, ServeConfig, Session};

#[derive(Parser)]
#[command(name = "velo", version, about = "Train, evaluate and serve planar locomotion policies")]
struct Cli {
    /// Root for relative run directories (overrides $VELO_DATA_DIR).
    #[arg(long, global = true)]
    data_dir: Option<PathBuf>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Train every seed of an experiment or matrix file.
    Train {
        config: PathBuf,
        /// Only experiments with this name.
        #[arg(long)]
        only: Option<String>,
        /// Only this seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Retrain even when a matching run exists.
        #[arg(long)]
        force: bool,
        /// Also run the evaluation sweep after each run.
        #[arg(long)]
        eval: bool,
    },
    /// Sweep a checkpoint, or every trained run of a config file.
    Eval {
        /// A `.ckpt` file or an experiment/matrix config.
        target: PathBuf,
        /// Teacher checkpoint for a student (defaults to the sibling `teacher.ckpt`).
        #[arg(long)]
        teacher: Option<PathBuf>,
        /// Output directory for a single checkpoint.
        #[arg(long, default_value = "eval")]
        out: PathBuf,
        /// Evaluation settings (JSON); defaults apply otherwise.
        #[arg(long)]
        eval_config: Option<PathBuf>,
    },
    /// Aggregate evaluated runs into mean and std command areas.
    Compare {
        /// Experiment/matrix configs or run directories.
        #[arg(required = true)]
        inputs: Vec<PathBuf>,
        #[arg(long, default_value = "compare")]
        out: PathBuf,
    },
    /// Stream a checkpoint over websocket at 50 Hz.
    Serve {
        checkpoint: PathBuf,
        #[arg(long)]
        teacher: Option<PathBuf>,
        #[arg(long, default_value = "127.0.0.1:8765")]
        addr: String,
    },
    /// Roll out a checkpoint under a command schedule and dump the state to CSV.
    Replay {
        checkpoint: PathBuf,
        #[arg(long)]
        teacher: Option<PathBuf>,
        /// Command schedule (JSON); a 1 m/s forward command otherwise.
        #[arg(long)]
        schedule: Option<PathBuf>,
        #[arg(long, default_value = "replay.csv")]
        out: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    if let Some(d) = &cli.data_dir {
        std::env::set_var(DATA_DIR_VAR, d);
    }
    match cli.cmd {
        Cmd::Train { config, only, seed, force, eval } => train_cmd(&config, only.as_deref(), seed, force, eval),
        Cmd::Eval { target, teacher, out, eval_config } => eval_cmd(&target, teacher.as_deref(), &out, eval_config.as_deref()),
        Cmd::Compare { inputs, out } => compare_cmd(&inputs, &out),
        Cmd::Serve { checkpoint, teacher, addr } => serve_cmd(&checkpoint, teacher.as_deref(), &addr),
        Cmd::Replay { checkpoint, teacher, schedule, out, seed } => {
            replay_cmd(&checkpoint, teacher.as_deref(), schedule.as_deref(), &out, seed)
        }
    }
}

fn selected(config: &Path, only: Option<&str>) -> Result<Vec<ExperimentConfig>> {
    let exps = load_experiments(config).with_context(|| format!("loading {}", config.display()))?;
    let exps: Vec<_> = exps.into_iter().filter(|e| only.is_none_or(|n| e.name == n)).collect();
    if exps.is_empty() {
        bail!("no experiment matches");
    }
    Ok(exps)
}

fn train_cmd(config: &Path, only: Option<&str>, seed: Option<u64>, force: bool, eval: bool) -> Result<()> {
    for exp in selected(config, only)? {
        for &s in exp.seeds.iter().filter(|&&s| seed.is_none_or(|x| x == s)) {
            let iters = exp.ppo.iterations();
            eprintln!("== {} seed {s} ({iters} iterations)", exp.name);
            let progress = stderr_progress(iters, 10);
            let dir = if force {
                train_seed(&exp, s, progress)?.0
            } else {
                ensure_trained(&exp, s, progress)?
            };
            println!("{}", dir.display());
            if eval {
                for (kind, h) in ensure_evaluated(&dir, &exp.eval, |_, _, _| {})? {
                    println!("  {kind}: area@0.5 = {:.2}", h.command_area(0.5));
                }
            }
        }
    }
    Ok(())
}

fn eval_cmd(target: &Path, teacher: Option<&Path>, out: &Path, eval_config: Option<&Path>) -> Result<()> {
    let is_ckpt = target.extension().is_some_and(|e| e == "ckpt");
    if is_ckpt {
        let eval: EvalConfig = match eval_config {
            Some(p) => serde_json::from_str(&std::fs::read_to_string(p)?)?,
            None => EvalConfig::default(),
        };
        let ckpt = load_for_eval(target, teacher)?;
        let h = evaluate_checkpoint(&ckpt, &eval, out, |_, _| {})?;
        for &e in &eval.thresholds {
            println!("eps0 {e:>4}: area {:.2}", h.command_area(e));
        }
        return Ok(());
    }
    for exp in selected(target, None)? {
        for &s in &exp.seeds {
            let dir = exp.run_dir(s);
            for (kind, h) in ensure_evaluated(&dir, &exp.eval, |_, _, _| {})
                .with_context(|| format!("evaluating {}", dir.display()))?
            {
                println!("{} seed {s} {kind}: area@0.5 = {:.2}", exp.name, h.command_area(0.5));
            }
        }
    }
    Ok(())
}

fn compare_cmd(inputs: &[PathBuf], out: &Path) -> Result<()> {
    let mut results = Vec::new();
    let mut thresholds = None;
    for input in inputs {
        if input.is_dir() {
            results.extend(load_run_results(input)?);
        } else {
            for exp in selected(input, None)? {
                thresholds.get_or_insert_with(|| exp.eval.thresholds.clone());
                for &s in &exp.seeds {
                    results.extend(load_run_results(&exp.run_dir(s))?);
                }
            }
        }
    }
    let thresholds = thresholds.unwrap_or_else(velo::experiment::default_thresholds);
    let summaries = compare(&results, &thresholds)?;
    write_compare(&summaries, out)?;
    print!("{:<28}", "condition");
    for t in &thresholds {
        print!("{t:>14}");
    }
    println!();
    for s in &summaries {
        print!("{:<28}", s.condition);
        for i in 0..thresholds.len() {
            print!("{:>14}", format!("{:.2}±{:.2}", s.mean[i], s.std[i]));
        }
        println!();
    }
    Ok(())
}

fn serve_cmd(checkpoint: &Path, teacher: Option<&Path>, addr: &str) -> Result<()> {
    let ckpt = load_for_eval(checkpoint, teacher)?;
    let policy = DeployedPolicy::from_checkpoint(&ckpt)?;
    let session = Session::new(policy, &ckpt.header.env, ServeConfig::default())?;
    let rt = tokio::runtime::Runtime::new()?;
    rt.block_on(async {
        let listener = tokio::net::TcpListener::bind(addr).await.with_context(|| format!("binding {addr}"))?;
        let handle = spawn_server(session, listener).await?;
        eprintln!("serving {} ({}) on ws://{}", checkpoint.display(), ckpt.header.kind, handle.addr);
        handle.wait().await;
        Ok(())
    })
}

fn replay_cmd(checkpoint: &Path, teacher: Option<&Path>, schedule: Option<&Path>, out: &Path, seed: u64) -> Result<()> {
    let ckpt = load_for_eval(checkpoint, teacher)?;
    let policy = DeployedPolicy::from_checkpoint(&ckpt)?;
    let schedule = match schedule {
        Some(p) => ReplaySchedule::load(p)?,
        None => ReplaySchedule::default(),
    };
    let file = std::fs::File::create(out).with_context(|| format!("creating {}", out.display()))?;
    let s = replay(&policy, &ckpt.header.env, &schedule, seed, std::io::BufWriter::new(file))?;
    println!(
        "{} steps, total reward {:.3}{} -> {}",
        s.steps,
        s.total_reward,
        if s.faulted { ", faulted" } else { "" },
        out.display()
    );
    Ok(())
}
