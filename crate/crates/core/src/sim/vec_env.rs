use std::sync::Arc;
use std::time::Instant;

use rayon::prelude::*;

use super::config::EnvConfig;
use super::env::{LocomotionEnv, StepInfo};
use super::types::{Action, Command, DomainParams, Observation};
use crate::error::{Error, Result};

/// Derives the seed of environment `index` from a run seed.
pub fn env_seed(seed: u64, index: usize) -> u64 {
    seed.wrapping_mul(0x9E37_79B9_7F4A_7C15)
        .wrapping_add((index as u64).wrapping_mul(0xBF58_476D_1CE4_E5B9))
        ^ 0x94D0_49BB_1331_11EB
}

#[derive(Debug, Clone)]
pub struct BatchStep {
    pub observations: Vec<Observation>,
    pub rewards: Vec<f64>,
    pub dones: Vec<bool>,
    pub infos: Vec<StepInfo>,
    /// Environment steps per wall-clock second for this call.
    pub steps_per_sec: f64,
}

/// A batch of independent environments stepped in lockstep.
///
/// Every environment owns its RNG stream, so the result does not depend on
/// whether the batch runs serially or on the rayon pool.
#[derive(Debug, Clone)]
pub struct VecEnv {
    envs: Vec<LocomotionEnv>,
    parallel: bool,
}

impl VecEnv {
    pub fn new(cfg: Arc<EnvConfig>, n: usize, seed: u64) -> Self {
        let envs = (0..n)
            .map(|i| LocomotionEnv::new(cfg.clone(), env_seed(seed, i)))
            .collect();
        Self {
            envs,
            parallel: false,
        }
    }

    pub fn with_parallel(mut self, parallel: bool) -> Self {
        self.parallel = parallel;
        self
    }

    pub fn len(&self) -> usize {
        self.envs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.envs.is_empty()
    }

    pub fn envs(&self) -> &[LocomotionEnv] {
        &self.envs
    }

    pub fn env_mut(&mut self, i: usize) -> &mut LocomotionEnv {
        &mut self.envs[i]
    }

    pub fn reset_all(&mut self, commands: &[Command], params: &[DomainParams]) -> Result<Vec<Observation>> {
        if commands.len() != self.envs.len() || params.len() != self.envs.len() {
            return Err(Error::LengthMismatch(format!(
                "{} envs, {} commands, {} params",
                self.envs.len(),
                commands.len(),
                params.len()
            )));
        }
        self.envs
            .iter_mut()
            .zip(commands.iter().zip(params))
            .map(|(e, (c, p))| e.reset(*c, *p))
            .collect()
    }

    pub fn batch_step(&mut self, actions: &[Action]) -> Result<BatchStep> {
        if actions.len() != self.envs.len() {
            return Err(Error::LengthMismatch(format!(
                "{} actions for {} envs",
                actions.len(),
                self.envs.len()
            )));
        }
        let start = Instant::now();
        let outcomes: Vec<_> = if self.parallel {
            self.envs
                .par_iter_mut()
                .zip(actions.par_iter())
                .map(|(e, a)| e.step(*a))
                .collect::<Result<_>>()?
        } else {
            self.envs
                .iter_mut()
                .zip(actions)
                .map(|(e, a)| e.step(*a))
                .collect::<Result<_>>()?
        };
        let elapsed = start.elapsed().as_secs_f64().max(1e-9);
        let n = outcomes.len();
        let mut out = BatchStep {
            observations: Vec::with_capacity(n),
            rewards: Vec::with_capacity(n),
            dones: Vec::with_capacity(n),
            infos: Vec::with_capacity(n),
            steps_per_sec: n as f64 / elapsed,
        };
        for o in outcomes {
            out.observations.push(o.observation);
            out.rewards.push(o.reward);
            out.dones.push(o.done);
            out.infos.push(o.info);
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn make(n: usize, parallel: bool) -> VecEnv {
        let cfg = Arc::new(EnvConfig::default());
        let mut v = VecEnv::new(cfg, n, 17).with_parallel(parallel);
        let cmds: Vec<_> = (0..n).map(|i| Command::new(i as f64 * 0.1, 0.0, 0.5)).collect();
        let params = vec![
            DomainParams {
                roughness: 10.0,
                ..Default::default()
            };
            n
        ];
        v.reset_all(&cmds, &params).unwrap();
        v
    }

    #[test]
    fn single_env_batch_equals_step() {
        let mut v = make(1, false);
        let mut e = v.envs()[0].clone();
        let a = Action([0.3, -0.2, 0.1]);
        let b = v.batch_step(&[a]).unwrap();
        let s = e.step(a).unwrap();
        assert_eq!(b.observations[0], s.observation);
        assert_eq!(b.rewards[0], s.reward);
        assert_eq!(b.infos[0], s.info);
    }

    #[test]
    fn serial_and_parallel_are_bit_identical() {
        let mut serial = make(64, false);
        let mut par = make(64, true);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        for _ in 0..50 {
            let acts: Vec<_> = (0..64)
                .map(|_| Action([rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)]))
                .collect();
            let a = serial.batch_step(&acts).unwrap();
            let b = par.batch_step(&acts).unwrap();
            assert_eq!(a.observations, b.observations);
            assert_eq!(a.rewards, b.rewards);
            assert_eq!(a.dones, b.dones);
        }
    }

    #[test]
    fn length_mismatch_rejected() {
        let mut v = make(4, false);
        assert!(matches!(v.batch_step(&[Action::default()]), Err(Error::LengthMismatch(_))));
    }

    #[test]
    fn throughput_reported() {
        let mut v = make(8, false);
        let b = v.batch_step(&[Action::default(); 8]).unwrap();
        assert!(b.steps_per_sec > 0.0);
    }
}
