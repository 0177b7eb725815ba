//! Teacher (privileged encoder), student (history-based adaptation module)
//! and the domain-randomized baseline, all sharing one policy body.

use ndarray::{Array1, Array2, ArrayView2, Axis};
use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::nn::{clip_global_norm, Adam, AdamConfig, ParameterSet, Real};

pub use crate::nn::PolicyKind as PolicyVariant;
use crate::nn::PolicyKind;

/// Latent fed to the body for each variant: `g(d)`, `h(history)` or zeros.
pub fn policy_latent<T: Real>(
    params: &ParameterSet<T>,
    kind: PolicyKind,
    domains: ArrayView2<T>,
    histories: ArrayView2<T>,
) -> Result<Array2<T>> {
    match kind {
        PolicyKind::Teacher => params.encoder_forward(domains),
        PolicyKind::Student => params.adaptation_forward(histories),
        PolicyKind::DomainRandomized => Ok(Array2::zeros((domains.nrows().max(histories.nrows()), params.latent_dim()))),
    }
}

/// Mean actions and log-std of π_T(x, d).
pub fn teacher_action<T: Real>(
    params: &ParameterSet<T>,
    x: ArrayView2<T>,
    d: ArrayView2<T>,
) -> Result<(Array2<T>, Array1<T>)> {
    let z = params.encoder_forward(d)?;
    Ok((params.policy_forward(x, z.view())?, params.log_std.clone()))
}

/// Mean actions and log-std of π_S(x, history).
pub fn student_action<T: Real>(
    params: &ParameterSet<T>,
    x: ArrayView2<T>,
    history: ArrayView2<T>,
) -> Result<(Array2<T>, Array1<T>)> {
    let z = params.adaptation_forward(history)?;
    Ok((params.policy_forward(x, z.view())?, params.log_std.clone()))
}

/// Mean actions and log-std of π_DR(x).
pub fn dr_action<T: Real>(params: &ParameterSet<T>, x: ArrayView2<T>) -> Result<(Array2<T>, Array1<T>)> {
    let z = Array2::zeros((x.nrows(), params.latent_dim()));
    Ok((params.policy_forward(x, z.view())?, params.log_std.clone()))
}

/// Mean squared error over latent components and the batch.
pub fn adaptation_loss<T: Real>(z_hat: ArrayView2<T>, z: ArrayView2<T>) -> Result<f64> {
    if z_hat.dim() != z.dim() {
        return Err(Error::DimensionMismatch {
            context: "adaptation loss",
            expected: z.len(),
            actual: z_hat.len(),
        });
    }
    if z.is_empty() {
        return Err(Error::EmptySeries);
    }
    let sum: f64 = z_hat.iter().zip(z.iter()).map(|(a, b)| (a.as_f64() - b.as_f64()).powi(2)).sum();
    Ok(sum / z.len() as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DistillConfig {
    pub lr: f64,
    pub epochs: usize,
    pub minibatches: usize,
    pub max_grad_norm: f64,
}

impl Default for DistillConfig {
    fn default() -> Self {
        Self {
            lr: 1e-3,
            epochs: 5,
            minibatches: 4,
            max_grad_norm: 1.0,
        }
    }
}

impl DistillConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.lr >= 0.0) || self.epochs * self.minibatches == 0 || !(self.max_grad_norm > 0.0) {
            return Err(Error::InvalidConfig("distill: lr >= 0, epochs*minibatches >= 1, max_grad_norm > 0".into()));
        }
        Ok(())
    }
}

/// Adam state for θ_a, kept apart from the PPO optimizer.
#[derive(Debug, Clone)]
pub struct AdaptationOptimizer<T> {
    adam: Adam<T>,
}

impl<T: Real> AdaptationOptimizer<T> {
    pub fn new(params: &ParameterSet<T>, lr: f64) -> Self {
        let sizes: Vec<usize> = params.adaptation.slices().iter().map(|s| s.len()).collect();
        Self {
            adam: Adam::new(AdamConfig { lr, ..Default::default() }, &sizes),
        }
    }

    pub fn set_lr(&mut self, lr: f64) {
        self.adam.config.lr = lr;
    }
}

/// One Adam step on θ_a toward the encoder's latents for `domains`.
/// θ_d and θ_b are only read. Returns the loss before the step.
pub fn distill_step<T: Real>(
    params: &mut ParameterSet<T>,
    opt: &mut AdaptationOptimizer<T>,
    histories: ArrayView2<T>,
    domains: ArrayView2<T>,
    max_grad_norm: f64,
) -> Result<f64> {
    if histories.nrows() != domains.nrows() {
        return Err(Error::LengthMismatch(format!(
            "{} histories for {} targets",
            histories.nrows(),
            domains.nrows()
        )));
    }
    let target = params.encoder_forward(domains)?;
    if histories.ncols() != params.adaptation.input_dim() {
        return Err(Error::DimensionMismatch {
            context: "adaptation history",
            expected: params.adaptation.input_dim(),
            actual: histories.ncols(),
        });
    }
    let (z_hat, cache) = params.adaptation.forward_recorded(histories)?;
    let loss = adaptation_loss(z_hat.view(), target.view())?;
    if !loss.is_finite() {
        return Err(Error::NonFiniteLoss("adaptation"));
    }
    let scale = T::of(2.0 / z_hat.len() as f64);
    let d_out = (&z_hat - &target).mapv(|v| v * scale);
    let mut grads = params.adaptation.grads();
    params.adaptation.backward(&cache, d_out.view(), &mut grads, false)?;
    clip_global_norm(grads.slices_mut(), max_grad_norm);
    opt.adam.step(params.adaptation.slices_mut(), grads.slices());
    Ok(loss)
}

/// Supervised pass over a rollout: shuffled minibatches, `epochs` times.
/// Returns the mean pre-step loss.
pub fn distill<T: Real, R: Rng + ?Sized>(
    params: &mut ParameterSet<T>,
    opt: &mut AdaptationOptimizer<T>,
    histories: ArrayView2<T>,
    domains: ArrayView2<T>,
    cfg: &DistillConfig,
    rng: &mut R,
) -> Result<f64> {
    let n = histories.nrows();
    let mb = (n / cfg.minibatches).max(1);
    let mut idx: Vec<usize> = (0..n).collect();
    let mut total = 0.0;
    let mut count = 0;
    for _ in 0..cfg.epochs {
        idx.shuffle(rng);
        for chunk in idx.chunks(mb).take(cfg.minibatches) {
            let h = histories.select(Axis(0), chunk);
            let d = domains.select(Axis(0), chunk);
            total += distill_step(params, opt, h.view(), d.view(), cfg.max_grad_norm)?;
            count += 1;
        }
    }
    Ok(total / count.max(1) as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nn::ArchConfig;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn params(seed: u64) -> ParameterSet<f64> {
        ParameterSet::init(&ArchConfig::small(), &mut ChaCha8Rng::seed_from_u64(seed)).unwrap()
    }

    #[test]
    fn loss_examples() {
        let z = Array2::from_shape_fn((3, 8), |(i, j)| (i * 8 + j) as f64 * 0.1);
        assert_eq!(adaptation_loss(z.view(), z.view()).unwrap(), 0.0);
        let shifted = &z + 1.0;
        assert!((adaptation_loss(shifted.view(), z.view()).unwrap() - 1.0).abs() < 1e-12);
        assert!(adaptation_loss(Array2::<f64>::zeros((3, 7)).view(), z.view()).is_err());
    }

    #[test]
    fn teacher_is_two_step_composition() {
        let p = params(1);
        let x = Array2::from_elem((2, 9), 0.3);
        let d = Array2::from_elem((2, 6), -0.2);
        let (mean, _) = teacher_action(&p, x.view(), d.view()).unwrap();
        let z = p.encoder_forward(d.view()).unwrap();
        assert_eq!(mean, p.policy_forward(x.view(), z.view()).unwrap());
    }

    #[test]
    fn distill_leaves_encoder_and_body_alone() {
        let mut p = params(2);
        let before = p.clone();
        let mut opt = AdaptationOptimizer::new(&p, 1e-2);
        let h = Array2::from_shape_fn((16, 135), |(i, j)| ((i * 135 + j) as f64 * 0.01).sin());
        let d = Array2::from_shape_fn((16, 6), |(i, j)| ((i + j) as f64 * 0.3).cos());
        distill_step(&mut p, &mut opt, h.view(), d.view(), 1.0).unwrap();
        assert_eq!(p.encoder, before.encoder);
        assert_eq!(p.body, before.body);
        assert_ne!(p.adaptation, before.adaptation);
    }

    #[test]
    fn zero_lr_distill_is_noop() {
        let mut p = params(3);
        let before = p.clone();
        let mut opt = AdaptationOptimizer::new(&p, 0.0);
        let h = Array2::from_elem((4, 135), 0.2);
        let d = Array2::from_elem((4, 6), 0.1);
        distill_step(&mut p, &mut opt, h.view(), d.view(), 1.0).unwrap();
        assert_eq!(p, before);
    }
}
