use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use velo::curriculum::{CommandBox, GridSpec, Interval};
use velo::metrics::{run_tracking_trial, sweep_policy, SweepConfig, TrialConfig};
use velo::nn::{ArchConfig, ParameterSet, PolicyKind};
use velo::policy::{DeployedPolicy, Standstill};
use velo::sim::{Command, DomainParams, EnvConfig, ProportionalController};

fn small_grid() -> GridSpec {
    GridSpec {
        bounds: CommandBox {
            vx: Interval::new(-1.0, 1.0),
            wz: Interval::new(-1.0, 1.0),
        },
        resolution: [0.5, 0.5],
    }
}

#[test]
fn oracle_controller_tracks_unit_forward_command() {
    let params = DomainParams {
        friction: 3.0,
        ..Default::default()
    };
    let s = run_tracking_trial(
        &ProportionalController::default(),
        &EnvConfig::default(),
        &TrialConfig::default(),
        Command::new(1.0, 0.0, 0.0),
        params,
        1,
    )
    .unwrap();
    let rms = (s.vx.iter().map(|v| (v - 1.0).powi(2)).sum::<f64>() / s.vx.len() as f64).sqrt();
    assert!(rms < 0.1, "rms {rms}");
    assert_eq!(s.vx.len(), 200);
}

#[test]
fn zero_command_keeps_body_still() {
    let s = run_tracking_trial(
        &ProportionalController::default(),
        &EnvConfig::default(),
        &TrialConfig::default(),
        Command::default(),
        DomainParams::default(),
        2,
    )
    .unwrap();
    assert!(s.vx.iter().chain(&s.wz).all(|v| v.abs() < 1e-9));
}

#[test]
fn trial_is_reproducible() {
    let run = || {
        run_tracking_trial(
            &ProportionalController::default(),
            &EnvConfig::default(),
            &TrialConfig::default(),
            Command::new(0.5, 0.1, -0.4),
            DomainParams::default(),
            3,
        )
        .unwrap()
    };
    assert_eq!(run(), run());
}

#[test]
fn standing_still_error_equals_mean_command_magnitude() {
    let cfg = SweepConfig {
        grid: small_grid(),
        trials_per_cell: 40,
        trial: TrialConfig {
            duration: 20,
            settle: 5,
        },
        ..Default::default()
    };
    let h = sweep_policy(&Standstill, &EnvConfig::default(), DomainParams::default(), &cfg, |_, _| {}).unwrap();
    for iw in 0..4 {
        for iv in 0..4 {
            let (v0, v1) = cfg.grid.v_edges(iv);
            // mean of |v| for v uniform on [v0, v1] (the cells never straddle 0)
            let expected = 0.5 * (v0.abs() + v1.abs());
            let (ev, _) = h.get(iv, iw);
            assert!((ev - expected).abs() < 0.08, "cell ({iv},{iw}): {ev} vs {expected}");
        }
    }
}

#[test]
fn single_cell_grid_gives_one_cell() {
    let cfg = SweepConfig {
        grid: GridSpec {
            bounds: CommandBox {
                vx: Interval::new(0.0, 0.5),
                wz: Interval::new(0.0, 0.5),
            },
            resolution: [0.5, 0.5],
        },
        trial: TrialConfig {
            duration: 30,
            settle: 10,
        },
        ..Default::default()
    };
    let h = sweep_policy(&ProportionalController::default(), &EnvConfig::default(), DomainParams::default(), &cfg, |_, _| {})
        .unwrap();
    assert_eq!(h.eps_v.len(), 1);
}

#[test]
fn sweep_is_deterministic_and_batch_independent() {
    let arch = ArchConfig::small();
    let params = ParameterSet::<f32>::init(&arch, &mut ChaCha8Rng::seed_from_u64(4)).unwrap();
    let env = EnvConfig::default();
    let policy = DeployedPolicy::new(params, PolicyKind::Student, env.ranges.clone()).unwrap();
    let mut cfg = SweepConfig {
        grid: small_grid(),
        trial: TrialConfig {
            duration: 40,
            settle: 10,
        },
        seed: 8,
        ..Default::default()
    };
    let a = sweep_policy(&policy, &env, DomainParams::default(), &cfg, |_, _| {}).unwrap();
    let b = sweep_policy(&policy, &env, DomainParams::default(), &cfg, |_, _| {}).unwrap();
    cfg.cells_per_batch = 3;
    let c = sweep_policy(&policy, &env, DomainParams::default(), &cfg, |_, _| {}).unwrap();
    assert_eq!(a, b);
    assert_eq!(a, c);
}

#[test]
fn untrained_policy_has_no_command_area() {
    let arch = ArchConfig::default();
    let params = ParameterSet::<f32>::init(&arch, &mut ChaCha8Rng::seed_from_u64(5)).unwrap();
    let env = EnvConfig::default();
    let policy = DeployedPolicy::new(params, PolicyKind::Teacher, env.ranges.clone()).unwrap();
    let cfg = SweepConfig {
        trials_per_cell: 2,
        trial: TrialConfig {
            duration: 60,
            settle: 20,
        },
        ..Default::default()
    };
    let h = sweep_policy(&policy, &env, DomainParams::default(), &cfg, |_, _| {}).unwrap();
    // only cells at the origin can pass by accident
    assert!(h.command_area(0.5) <= 1.0, "area {}", h.command_area(0.5));
}
