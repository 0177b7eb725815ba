use serde::{Deserialize, Serialize};

use super::mlp::Real;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdamConfig {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        Self {
            lr: 1e-3,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
        }
    }
}

/// Adam over a fixed list of parameter buffers.
#[derive(Debug, Clone)]
pub struct Adam<T> {
    pub config: AdamConfig,
    m: Vec<Vec<T>>,
    v: Vec<Vec<T>>,
    t: u64,
}

impl<T: Real> Adam<T> {
    /// `sizes` lists the length of every buffer, in the order passed to
    /// [`Adam::step`].
    pub fn new(config: AdamConfig, sizes: &[usize]) -> Self {
        Self {
            config,
            m: sizes.iter().map(|&n| vec![T::zero(); n]).collect(),
            v: sizes.iter().map(|&n| vec![T::zero(); n]).collect(),
            t: 0,
        }
    }

    pub fn steps(&self) -> u64 {
        self.t
    }

    pub fn step(&mut self, params: Vec<&mut [T]>, grads: Vec<&[T]>) {
        assert_eq!(params.len(), self.m.len(), "adam buffer count");
        assert_eq!(grads.len(), self.m.len(), "adam gradient count");
        self.t += 1;
        let c = self.config;
        let b1 = T::of(c.beta1);
        let b2 = T::of(c.beta2);
        let one = T::one();
        let bc1 = 1.0 - c.beta1.powi(self.t as i32);
        let bc2 = 1.0 - c.beta2.powi(self.t as i32);
        let step = T::of(c.lr * bc2.sqrt() / bc1);
        let eps = T::of(c.eps * bc2.sqrt());
        for (((p, g), m), v) in params.into_iter().zip(grads).zip(&mut self.m).zip(&mut self.v) {
            for i in 0..p.len() {
                let gi = g[i];
                m[i] = b1 * m[i] + (one - b1) * gi;
                v[i] = b2 * v[i] + (one - b2) * gi * gi;
                p[i] = p[i] - step * m[i] / (v[i].sqrt() + eps);
            }
        }
    }
}

/// Global L2 norm of a set of gradient buffers.
pub fn global_norm<T: Real>(grads: &[&[T]]) -> f64 {
    grads
        .iter()
        .flat_map(|g| g.iter())
        .map(|v| v.as_f64() * v.as_f64())
        .sum::<f64>()
        .sqrt()
}

/// Rescales gradients so their global norm is at most `max_norm`.
pub fn clip_global_norm<T: Real>(grads: Vec<&mut [T]>, max_norm: f64) -> f64 {
    let norm = grads
        .iter()
        .flat_map(|g| g.iter())
        .map(|v| v.as_f64() * v.as_f64())
        .sum::<f64>()
        .sqrt();
    if norm > max_norm && norm > 0.0 {
        let s = T::of(max_norm / norm);
        for g in grads {
            g.iter_mut().for_each(|v| *v = *v * s);
        }
    }
    norm
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn first_step_moves_by_lr() {
        let mut p = vec![1.0f64, -1.0];
        let g = vec![0.5f64, -2.0];
        let mut adam = Adam::new(AdamConfig::default(), &[2]);
        adam.step(vec![&mut p], vec![&g]);
        assert!((p[0] - (1.0 - 1e-3)).abs() < 1e-9);
        assert!((p[1] - (-1.0 + 1e-3)).abs() < 1e-9);
    }

    #[test]
    fn zero_lr_keeps_params() {
        let mut p = vec![0.3f64];
        let mut adam = Adam::new(AdamConfig { lr: 0.0, ..Default::default() }, &[1]);
        adam.step(vec![&mut p], vec![&[4.0]]);
        assert_eq!(p[0], 0.3);
    }

    #[test]
    fn clipping_bounds_norm() {
        let mut a = vec![3.0f64];
        let mut b = vec![4.0f64];
        let n = clip_global_norm(vec![&mut a, &mut b], 1.0);
        assert_eq!(n, 5.0);
        assert!((a[0] - 0.6).abs() < 1e-12 && (b[0] - 0.8).abs() < 1e-12);
    }
}
