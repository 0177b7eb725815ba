use ndarray::{Array1, Array2};
use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::config::PpoConfig;
use super::gae::normalize_advantages;
use super::rollout::{select_as, RolloutBuffer};
use crate::error::{Error, Result};
use crate::nn::{clip_global_norm, concat_cols, Adam, AdamConfig, MlpGrads, ParameterSet, PolicyKind, Real};
use crate::sim::INPUT_DIM;

const HALF_LN_2PI_E: f64 = 1.418_938_533_204_672_7;

/// Adam state over encoder, body, value net and log-std.
#[derive(Debug, Clone)]
pub struct PpoOptimizer<T> {
    adam: Adam<T>,
}

impl<T: Real> PpoOptimizer<T> {
    pub fn new(params: &ParameterSet<T>, lr: f64) -> Self {
        let sizes: Vec<usize> = trainable(params).iter().map(|s| s.len()).collect();
        Self {
            adam: Adam::new(AdamConfig { lr, ..Default::default() }, &sizes),
        }
    }

    pub fn set_lr(&mut self, lr: f64) {
        self.adam.config.lr = lr;
    }
}

fn trainable<T: Real>(p: &ParameterSet<T>) -> Vec<&[T]> {
    let mut v = p.encoder.slices();
    v.extend(p.body.slices());
    v.extend(p.value.slices());
    v.push(p.log_std.as_slice().expect("contiguous"));
    v
}

fn trainable_mut<T: Real>(p: &mut ParameterSet<T>) -> Vec<&mut [T]> {
    let mut v = p.encoder.slices_mut();
    v.extend(p.body.slices_mut());
    v.extend(p.value.slices_mut());
    v.push(p.log_std.as_slice_mut().expect("contiguous"));
    v
}

struct Grads<T> {
    encoder: MlpGrads<T>,
    body: MlpGrads<T>,
    value: MlpGrads<T>,
    log_std: Array1<T>,
}

impl<T: Real> Grads<T> {
    fn new(p: &ParameterSet<T>) -> Self {
        Self {
            encoder: p.encoder.grads(),
            body: p.body.grads(),
            value: p.value.grads(),
            log_std: Array1::zeros(p.log_std.len()),
        }
    }

    fn slices(&self) -> Vec<&[T]> {
        let mut v = self.encoder.slices();
        v.extend(self.body.slices());
        v.extend(self.value.slices());
        v.push(self.log_std.as_slice().expect("contiguous"));
        v
    }

    fn slices_mut(&mut self) -> Vec<&mut [T]> {
        let mut v = self.encoder.slices_mut();
        v.extend(self.body.slices_mut());
        v.extend(self.value.slices_mut());
        v.push(self.log_std.as_slice_mut().expect("contiguous"));
        v
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct UpdateStats {
    pub policy_loss: f64,
    pub value_loss: f64,
    pub entropy: f64,
    pub approx_kl: f64,
    pub clip_fraction: f64,
    pub mean_ratio: f64,
    pub grad_norm: f64,
    pub minibatches: usize,
}

/// Loss terms and gradients of one minibatch.
pub struct MinibatchResult<T> {
    pub stats: UpdateStats,
    grads: Grads<T>,
}

impl<T: Real> MinibatchResult<T> {
    /// Gradient buffers in the optimizer's order (encoder, body, value, log-std).
    pub fn grad_slices(&self) -> Vec<&[T]> {
        self.grads.slices()
    }
}

/// Clipped-surrogate loss and its exact gradient for the rows `idx` of `buf`.
pub fn minibatch_loss<T: Real>(
    params: &ParameterSet<T>,
    kind: PolicyKind,
    buf: &RolloutBuffer,
    idx: &[usize],
    cfg: &PpoConfig,
) -> Result<MinibatchResult<T>> {
    let b = idx.len();
    let bf = b as f64;
    let x = select_as::<T>(buf.inputs.view(), idx);
    let mut adv: Vec<f64> = idx.iter().map(|&r| buf.advantages[r]).collect();
    if cfg.normalize_advantages {
        normalize_advantages(&mut adv);
    }

    let mut grads = Grads::new(params);
    let (z, enc_cache) = match kind {
        PolicyKind::Teacher => {
            let d = select_as::<T>(buf.domains.view(), idx);
            let (z, c) = params.encoder.forward_recorded(d.view())?;
            (z, Some(c))
        }
        PolicyKind::DomainRandomized => (Array2::zeros((b, params.latent_dim())), None),
        PolicyKind::Student => {
            return Err(Error::InvalidConfig("PPO trains the teacher or DR variant; the student is distilled".into()))
        }
    };
    let xz = concat_cols(x.view(), z.view())?;
    let (mean, body_cache) = params.body.forward_recorded(xz.view())?;
    let (value, value_cache) = params.value.forward_recorded(xz.view())?;

    let log_std: Vec<f64> = params.log_std.iter().map(|v| v.as_f64()).collect();
    let inv_var: Vec<f64> = log_std.iter().map(|l| (-2.0 * l).exp()).collect();
    let k = log_std.len();

    let mut d_mean = Array2::<T>::zeros((b, k));
    let mut d_log_std = vec![0.0; k];
    let mut d_value = Array2::<T>::zeros((b, 1));
    let (mut pg, mut vl, mut kl, mut clipped, mut ratio_sum) = (0.0, 0.0, 0.0, 0usize, 0.0);
    for (row, &r) in idx.iter().enumerate() {
        let mut lp = 0.0;
        let mut diff = [0.0; crate::sim::ACTION_DIM];
        for j in 0..k {
            let dj = buf.actions[[r, j]] - mean[[row, j]].as_f64();
            diff[j] = dj;
            lp += -0.5 * dj * dj * inv_var[j] - log_std[j];
        }
        lp -= 0.5 * k as f64 * (2.0 * std::f64::consts::PI).ln();
        let log_ratio = lp - buf.log_probs[r];
        let ratio = log_ratio.exp();
        let a = adv[row];
        let unclipped = ratio * a;
        let clipped_obj = ratio.clamp(1.0 - cfg.clip, 1.0 + cfg.clip) * a;
        pg -= unclipped.min(clipped_obj);
        ratio_sum += ratio;
        kl += (ratio - 1.0) - log_ratio;
        if (ratio - 1.0).abs() > cfg.clip {
            clipped += 1;
        }
        // gradient flows only through the unclipped branch when it is the minimum
        if unclipped <= clipped_obj {
            let dlp = -unclipped / bf;
            for j in 0..k {
                d_mean[[row, j]] = T::of(dlp * diff[j] * inv_var[j]);
                d_log_std[j] += dlp * (diff[j] * diff[j] * inv_var[j] - 1.0);
            }
        }
        let err = value[[row, 0]].as_f64() - buf.returns[r];
        vl += err * err;
        d_value[[row, 0]] = T::of(2.0 * cfg.value_coef * err / bf);
    }
    pg /= bf;
    vl /= bf;
    let entropy: f64 = log_std.iter().map(|l| l + HALF_LN_2PI_E).sum();
    for g in d_log_std.iter_mut() {
        *g -= cfg.entropy_coef;
    }
    let loss = pg + cfg.value_coef * vl - cfg.entropy_coef * entropy;
    if !loss.is_finite() {
        return Err(Error::NonFiniteLoss("ppo"));
    }

    let d_xz = params
        .body
        .backward(&body_cache, d_mean.view(), &mut grads.body, enc_cache.is_some())?;
    if let (Some(cache), Some(d_xz)) = (enc_cache, d_xz) {
        let d_z = d_xz.slice(ndarray::s![.., INPUT_DIM..]).to_owned();
        params.encoder.backward(&cache, d_z.view(), &mut grads.encoder, false)?;
    }
    // the critic sees z but does not shape the encoder
    params.value.backward(&value_cache, d_value.view(), &mut grads.value, false)?;
    grads.log_std = Array1::from_iter(d_log_std.iter().map(|v| T::of(*v)));

    Ok(MinibatchResult {
        stats: UpdateStats {
            policy_loss: pg,
            value_loss: vl,
            entropy,
            approx_kl: kl / bf,
            clip_fraction: clipped as f64 / bf,
            mean_ratio: ratio_sum / bf,
            grad_norm: 0.0,
            minibatches: 1,
        },
        grads,
    })
}

/// `cfg.epochs` passes of `cfg.minibatches` shuffled minibatches, one Adam
/// step each. On a non-finite loss the parameters and optimizer state are
/// restored and the error is returned.
pub fn ppo_update<T: Real, R: Rng + ?Sized>(
    buf: &RolloutBuffer,
    params: &mut ParameterSet<T>,
    opt: &mut PpoOptimizer<T>,
    kind: PolicyKind,
    cfg: &PpoConfig,
    rng: &mut R,
) -> Result<UpdateStats> {
    if buf.advantages.len() != buf.len() || buf.returns.len() != buf.len() {
        return Err(Error::LengthMismatch("advantages not computed for this buffer".into()));
    }
    let saved = (params.clone(), opt.clone());
    let n = buf.len();
    let mb = (n / cfg.minibatches).max(1);
    let mut idx: Vec<usize> = (0..n).collect();
    let mut total = UpdateStats::default();
    for _ in 0..cfg.epochs {
        idx.shuffle(rng);
        for chunk in idx.chunks(mb).take(cfg.minibatches) {
            let mut res = match minibatch_loss(params, kind, buf, chunk, cfg) {
                Ok(r) => r,
                Err(e) => {
                    *params = saved.0;
                    *opt = saved.1;
                    return Err(e);
                }
            };
            let norm = clip_global_norm(res.grads.slices_mut(), cfg.max_grad_norm);
            opt.adam.step(trainable_mut(params), res.grads.slices());
            if !params.is_finite() {
                *params = saved.0;
                *opt = saved.1;
                return Err(Error::NonFiniteLoss("ppo parameters"));
            }
            let s = res.stats;
            total.policy_loss += s.policy_loss;
            total.value_loss += s.value_loss;
            total.entropy += s.entropy;
            total.approx_kl += s.approx_kl;
            total.clip_fraction += s.clip_fraction;
            total.mean_ratio += s.mean_ratio;
            total.grad_norm += norm;
            total.minibatches += 1;
        }
    }
    let m = total.minibatches.max(1) as f64;
    total.policy_loss /= m;
    total.value_loss /= m;
    total.entropy /= m;
    total.approx_kl /= m;
    total.clip_fraction /= m;
    total.mean_ratio /= m;
    total.grad_norm /= m;
    Ok(total)
}
