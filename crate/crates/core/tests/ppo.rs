use std::sync::Arc;

use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use velo::curriculum::{Curriculum, CurriculumConfig, CurriculumKind};
use velo::nn::{ArchConfig, ParameterSet, PolicyKind};
use velo::ppo::{
    collect_rollout, minibatch_loss, ppo_update, reset_envs, PpoConfig, PpoOptimizer, RewardNormalizer,
    RolloutBuffer, RolloutOptions,
};
use velo::sim::{EnvConfig, VecEnv};

fn setup(n_envs: usize, episode_length: usize, seed: u64) -> (VecEnv, Curriculum, EnvConfig, ChaCha8Rng) {
    let env = EnvConfig {
        episode_length,
        ..Default::default()
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut envs = VecEnv::new(Arc::new(env.clone()), n_envs, seed);
    let cur = Curriculum::new(CurriculumKind::Grid, CurriculumConfig::default(), None).unwrap();
    reset_envs(&mut envs, &cur, &env.ranges, &mut rng).unwrap();
    (envs, cur, env, rng)
}

fn rollout(
    params: &ParameterSet<f64>,
    n_envs: usize,
    episode_length: usize,
    seed: u64,
    opts: RolloutOptions,
) -> (RolloutBuffer, Curriculum) {
    let (mut envs, mut cur, env, mut rng) = setup(n_envs, episode_length, seed);
    let cfg = PpoConfig {
        n_envs,
        ..Default::default()
    };
    let mut norm = RewardNormalizer::new(n_envs, cfg.gamma, true);
    let buf = collect_rollout(
        &mut envs,
        params,
        PolicyKind::Teacher,
        &mut cur,
        &mut norm,
        &env.ranges,
        &cfg,
        opts,
        &mut rng,
    )
    .unwrap();
    (buf, cur)
}

fn small_params(seed: u64) -> ParameterSet<f64> {
    ParameterSet::init(&ArchConfig::small(), &mut ChaCha8Rng::seed_from_u64(seed)).unwrap()
}

#[test]
fn single_env_rollout_is_21_by_1() {
    let (buf, _) = rollout(&small_params(0), 1, 500, 1, RolloutOptions::default());
    assert_eq!((buf.steps, buf.envs), (21, 1));
    assert_eq!(buf.inputs.nrows(), 21);
    assert_eq!(buf.advantages.len(), 21);
    assert!(buf.dones.iter().all(|d| !d));
    assert!(buf.advantages.iter().all(|a| a.is_finite()));
}

#[test]
fn done_starts_a_new_episode_with_new_command() {
    let (buf, cur) = rollout(&small_params(0), 2, 5, 3, RolloutOptions::default());
    for t in 0..21 {
        for i in 0..2 {
            let row = t * 2 + i;
            assert_eq!(buf.dones[row], (t + 1) % 5 == 0);
            if buf.dones[row] && t + 1 < 21 {
                // command lives in columns 6..9 of the policy input
                let before = buf.inputs.row(row).slice(ndarray::s![6..9]).to_vec();
                let after = buf.inputs.row(row + 2).slice(ndarray::s![6..9]).to_vec();
                assert_ne!(before, after);
                // fresh episode: zero previous action
                assert!(buf.inputs.row(row + 2).slice(ndarray::s![3..6]).iter().all(|&v| v == 0.0));
            }
        }
    }
    assert_eq!(buf.episodes.len(), 8);
    assert_eq!(cur.episodes(), 8);
}

#[test]
fn deterministic_rollout_is_reproducible() {
    let p = small_params(5);
    let opts = RolloutOptions { deterministic: true };
    let (a, _) = rollout(&p, 3, 500, 9, opts);
    let (b, _) = rollout(&p, 3, 500, 9, opts);
    assert_eq!(a, b);
}

fn synthetic_buffer(params: &ParameterSet<f64>, n: usize, seed: u64) -> RolloutBuffer {
    let (mut buf, _) = rollout(params, n, 500, seed, RolloutOptions::default());
    let mut rng = ChaCha8Rng::seed_from_u64(seed + 100);
    for a in buf.advantages.iter_mut() {
        *a = rng.gen_range(-1.0..1.0);
    }
    for r in buf.returns.iter_mut() {
        *r = rng.gen_range(-1.0..1.0);
    }
    buf
}

fn total_loss(params: &ParameterSet<f64>, buf: &RolloutBuffer, idx: &[usize], cfg: &PpoConfig) -> f64 {
    let s = minibatch_loss(params, PolicyKind::Teacher, buf, idx, cfg).unwrap().stats;
    s.policy_loss + cfg.value_coef * s.value_loss - cfg.entropy_coef * s.entropy
}

#[test]
fn ppo_gradient_matches_central_differences() {
    let mut params = small_params(11);
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let mut buf = synthetic_buffer(&params, 2, 4);
    // move the policy so ratios differ from 1 and some samples clip
    for p in params.body.slices_mut() {
        for v in p.iter_mut() {
            *v += rng.gen_range(-0.05..0.05);
        }
    }
    for lp in buf.log_probs.iter_mut() {
        *lp += rng.gen_range(-0.1..0.1);
    }
    let idx: Vec<usize> = (0..buf.len()).collect();
    let cfg = PpoConfig::default();
    let res = minibatch_loss(&params, PolicyKind::Teacher, &buf, &idx, &cfg).unwrap();
    let analytic: Vec<Vec<f64>> = res.grad_slices().iter().map(|s| s.to_vec()).collect();

    // encoder, body, value, log_std buffers in optimizer order
    let n_enc = params.encoder.slices().len();
    let n_ada = params.adaptation.slices().len();
    let n_body = params.body.slices().len();
    let all = params.slices().len();
    let map: Vec<usize> = (0..n_enc)
        .chain(n_enc + n_ada..all)
        .collect();
    assert_eq!(map.len(), analytic.len());
    let _ = n_body;
    // the critic reads z without back-propagating into the encoder, so the
    // encoder's finite differences exclude the value term
    let no_value = PpoConfig {
        value_coef: 0.0,
        ..cfg.clone()
    };
    let h = 1e-6;
    let mut worst: f64 = 0.0;
    for (g, &b) in map.iter().enumerate() {
        let len = params.slices()[b].len();
        let c = if b < n_enc { &no_value } else { &cfg };
        for i in (0..len).step_by(7) {
            let orig = params.slices()[b][i];
            params.slices_mut()[b][i] = orig + h;
            let up = total_loss(&params, &buf, &idx, c);
            params.slices_mut()[b][i] = orig - h;
            let down = total_loss(&params, &buf, &idx, c);
            params.slices_mut()[b][i] = orig;
            let fd = (up - down) / (2.0 * h);
            let a = analytic[g][i];
            let err = (fd - a).abs() / fd.abs().max(a.abs()).max(1e-6);
            if err > 1e-4 {
                eprintln!("buffer {b} index {i}: fd {fd} analytic {a}");
            }
            worst = worst.max(err);
        }
    }
    assert!(worst < 1e-4, "worst relative error {worst}");
}

#[test]
fn first_epoch_surrogate_is_mean_advantage() {
    let params = small_params(13);
    let buf = synthetic_buffer(&params, 2, 6);
    let cfg = PpoConfig {
        normalize_advantages: false,
        ..Default::default()
    };
    let idx: Vec<usize> = (0..buf.len()).collect();
    let s = minibatch_loss(&params, PolicyKind::Teacher, &buf, &idx, &cfg).unwrap().stats;
    let mean_adv = buf.advantages.iter().sum::<f64>() / buf.len() as f64;
    assert!((s.policy_loss + mean_adv).abs() < 1e-9);
    assert!((s.mean_ratio - 1.0).abs() < 1e-9);
    assert_eq!(s.clip_fraction, 0.0);
}

#[test]
fn zero_advantage_moves_only_the_value_net() {
    let mut params = small_params(14);
    let mut buf = synthetic_buffer(&params, 2, 7);
    buf.advantages.iter_mut().for_each(|a| *a = 0.0);
    let before = params.clone();
    let cfg = PpoConfig {
        entropy_coef: 0.0,
        n_envs: 2,
        ..Default::default()
    };
    let mut opt = PpoOptimizer::new(&params, cfg.lr);
    ppo_update(&buf, &mut params, &mut opt, PolicyKind::Teacher, &cfg, &mut ChaCha8Rng::seed_from_u64(0)).unwrap();
    assert_eq!(params.body, before.body);
    assert_eq!(params.encoder, before.encoder);
    assert_eq!(params.log_std, before.log_std);
    assert_ne!(params.value, before.value);
}

#[test]
fn zero_lr_keeps_params() {
    let mut params = small_params(15);
    let buf = synthetic_buffer(&params, 2, 8);
    let before = params.clone();
    let cfg = PpoConfig {
        lr: 0.0,
        n_envs: 2,
        ..Default::default()
    };
    let mut opt = PpoOptimizer::new(&params, 0.0);
    let s = ppo_update(&buf, &mut params, &mut opt, PolicyKind::Teacher, &cfg, &mut ChaCha8Rng::seed_from_u64(0)).unwrap();
    assert_eq!(params, before);
    assert!((0.0..=1.0).contains(&s.clip_fraction));
}

#[test]
fn non_finite_loss_restores_params() {
    let mut params = small_params(16);
    let mut buf = synthetic_buffer(&params, 2, 9);
    let last = buf.returns.len() - 1;
    buf.returns[last] = f64::NAN;
    let before = params.clone();
    let cfg = PpoConfig {
        n_envs: 2,
        ..Default::default()
    };
    let mut opt = PpoOptimizer::new(&params, cfg.lr);
    let r = ppo_update(&buf, &mut params, &mut opt, PolicyKind::Teacher, &cfg, &mut ChaCha8Rng::seed_from_u64(0));
    assert!(r.is_err());
    assert_eq!(params, before);
}

/// One-dimensional bandit: a zero body whose output bias is the action
/// mean. With a single sample a > μ and advantage +1, the exact gradient of
/// −log π(a) w.r.t. μ is −(a − μ)/σ², so the mean must move up.
#[test]
fn bandit_mean_moves_toward_rewarded_action() {
    let arch = ArchConfig::small();
    let mut params: ParameterSet<f64> = ParameterSet::zeros(&arch).unwrap();
    let (mut buf, _) = rollout(&params, 1, 500, 2, RolloutOptions { deterministic: true });
    buf.actions.fill(0.0);
    buf.actions[[0, 0]] = 0.7;
    let idx = [0usize];
    buf.advantages = vec![1.0; buf.len()];
    buf.log_probs = vec![0.0; buf.len()];
    buf.log_probs[0] = velo::nn::gaussian_log_prob(&[0.0; 3], &[0.0; 3], &[0.7, 0.0, 0.0]);
    let cfg = PpoConfig {
        normalize_advantages: false,
        entropy_coef: 0.0,
        ..Default::default()
    };
    let res = minibatch_loss(&params, PolicyKind::Teacher, &buf, &idx, &cfg).unwrap();
    // body output bias is the last body buffer before the value net
    let n_enc = params.encoder.slices().len();
    let n_body = params.body.slices().len();
    let bias_grad = res.grad_slices()[n_enc + n_body - 1].to_vec();
    assert!((bias_grad[0] - (-0.7)).abs() < 1e-12);
    assert_eq!(bias_grad[1], 0.0);

    let mut opt = PpoOptimizer::new(&params, 1e-2);
    let mut one = buf.clone();
    one.steps = 1;
    one.envs = 1;
    for v in [&mut one.log_probs, &mut one.advantages, &mut one.returns, &mut one.values, &mut one.rewards, &mut one.raw_rewards] {
        v.truncate(1);
    }
    one.dones.truncate(1);
    one.inputs = one.inputs.slice(ndarray::s![0..1, ..]).to_owned();
    one.domains = one.domains.slice(ndarray::s![0..1, ..]).to_owned();
    one.actions = one.actions.slice(ndarray::s![0..1, ..]).to_owned();
    let cfg1 = PpoConfig {
        minibatches: 1,
        epochs: 1,
        n_envs: 1,
        ..cfg
    };
    ppo_update(&one, &mut params, &mut opt, PolicyKind::Teacher, &cfg1, &mut ChaCha8Rng::seed_from_u64(0)).unwrap();
    let mean = params.policy_forward(Array2::zeros((1, 9)).view(), Array2::zeros((1, 8)).view()).unwrap();
    assert!(mean[[0, 0]] > 0.0);
}
