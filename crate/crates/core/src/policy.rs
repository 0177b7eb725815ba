//! Controllers that act on batches of environments.

use ndarray::Array2;

use crate::error::{Error, Result};
use crate::nn::{Checkpoint, ParameterSet, PolicyKind, Real};
use crate::sim::{Action, DomainRanges, LocomotionEnv, ProportionalController, ACTION_DIM, DOMAIN_DIM, INPUT_DIM};
use crate::teacher_student::policy_latent;

pub trait Controller: Sync {
    fn act_batch(&self, envs: &[LocomotionEnv]) -> Result<Vec<Action>>;
}

/// Policy inputs, normalized domain vectors and history windows of a batch.
pub(crate) struct InputBatch<T> {
    pub x: Array2<T>,
    pub d: Array2<T>,
    pub h: Array2<T>,
}

pub(crate) fn gather_inputs<T: Real>(envs: &[LocomotionEnv], ranges: &DomainRanges, hist_dim: usize) -> InputBatch<T> {
    let n = envs.len();
    let mut x = Array2::zeros((n, INPUT_DIM));
    let mut d = Array2::zeros((n, DOMAIN_DIM));
    let mut h = Array2::zeros((n, hist_dim));
    let mut buf = vec![0.0; hist_dim];
    for (i, e) in envs.iter().enumerate() {
        for (j, v) in e.policy_input().to_array().into_iter().enumerate() {
            x[[i, j]] = T::of(v);
        }
        for (j, v) in e.params().normalized(ranges).into_iter().enumerate() {
            d[[i, j]] = T::of(v);
        }
        e.write_history(&mut buf);
        for (j, v) in buf.iter().enumerate() {
            h[[i, j]] = T::of(*v);
        }
    }
    InputBatch { x, d, h }
}

/// A trained policy acting with its mean action.
#[derive(Debug, Clone)]
pub struct DeployedPolicy {
    params: ParameterSet<f32>,
    kind: PolicyKind,
    ranges: DomainRanges,
}

impl DeployedPolicy {
    /// `ranges` must be the training ranges: the encoder reads parameters
    /// normalized against them.
    pub fn new(params: ParameterSet<f32>, kind: PolicyKind, ranges: DomainRanges) -> Result<Self> {
        if !params.is_finite() {
            return Err(Error::Checkpoint("non-finite parameters".into()));
        }
        Ok(Self { params, kind, ranges })
    }

    pub fn from_checkpoint(ckpt: &Checkpoint) -> Result<Self> {
        Self::new(ckpt.params.clone(), ckpt.header.kind, ckpt.header.env.ranges.clone())
    }

    pub fn kind(&self) -> PolicyKind {
        self.kind
    }

    pub fn params(&self) -> &ParameterSet<f32> {
        &self.params
    }

    pub fn ranges(&self) -> &DomainRanges {
        &self.ranges
    }
}

impl Controller for DeployedPolicy {
    fn act_batch(&self, envs: &[LocomotionEnv]) -> Result<Vec<Action>> {
        let hist_dim = if self.kind == PolicyKind::Student {
            self.params.adaptation.input_dim()
        } else {
            0
        };
        let b = gather_inputs::<f32>(envs, &self.ranges, hist_dim);
        let z = policy_latent(&self.params, self.kind, b.d.view(), b.h.view())?;
        let mean = self.params.policy_forward(b.x.view(), z.view())?;
        Ok(mean
            .rows()
            .into_iter()
            .map(|r| {
                let mut a = [0.0; ACTION_DIM];
                for (k, v) in r.iter().enumerate() {
                    a[k] = *v as f64;
                }
                Action(a)
            })
            .collect())
    }
}

impl Controller for ProportionalController {
    fn act_batch(&self, envs: &[LocomotionEnv]) -> Result<Vec<Action>> {
        Ok(envs
            .iter()
            .map(|e| {
                let s = e.state();
                self.act(s.lin_vel_body, s.yaw_rate, e.command(), e.params(), &e.config().physics)
            })
            .collect())
    }
}

/// Applies no wrench; the body stays where it is.
#[derive(Debug, Clone, Copy, Default)]
pub struct Standstill;

impl Controller for Standstill {
    fn act_batch(&self, envs: &[LocomotionEnv]) -> Result<Vec<Action>> {
        Ok(vec![Action::default(); envs.len()])
    }
}
