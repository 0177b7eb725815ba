use crate::error::{Error, Result};

/// Generalized advantage estimation over one env's time series.
///
/// `dones[t]` marks that the episode ended at step `t`, so neither the value
/// of step `t + 1` nor its advantage flows back across the boundary.
pub fn compute_gae(
    rewards: &[f64],
    values: &[f64],
    dones: &[bool],
    bootstrap_value: f64,
    gamma: f64,
    lambda: f64,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let n = rewards.len();
    if values.len() != n || dones.len() != n {
        return Err(Error::LengthMismatch(format!(
            "{} rewards, {} values, {} dones",
            n,
            values.len(),
            dones.len()
        )));
    }
    let mut adv = vec![0.0; n];
    let mut next_adv = 0.0;
    let mut next_value = bootstrap_value;
    for t in (0..n).rev() {
        let mask = if dones[t] { 0.0 } else { 1.0 };
        let delta = rewards[t] + gamma * next_value * mask - values[t];
        next_adv = delta + gamma * lambda * mask * next_adv;
        adv[t] = next_adv;
        next_value = values[t];
    }
    let returns = adv.iter().zip(values).map(|(a, v)| a + v).collect();
    Ok((adv, returns))
}

/// GAE on a `[steps, envs]` row-major layout (index `t * envs + i`).
pub fn compute_gae_batch(
    rewards: &[f64],
    values: &[f64],
    dones: &[bool],
    bootstrap: &[f64],
    gamma: f64,
    lambda: f64,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let envs = bootstrap.len();
    if envs == 0 || rewards.len() % envs != 0 || values.len() != rewards.len() || dones.len() != rewards.len() {
        return Err(Error::LengthMismatch(format!(
            "{} rewards, {} values, {} dones for {} envs",
            rewards.len(),
            values.len(),
            dones.len(),
            envs
        )));
    }
    let steps = rewards.len() / envs;
    let mut adv = vec![0.0; rewards.len()];
    let mut ret = vec![0.0; rewards.len()];
    let mut r = vec![0.0; steps];
    let mut v = vec![0.0; steps];
    let mut d = vec![false; steps];
    for i in 0..envs {
        for t in 0..steps {
            r[t] = rewards[t * envs + i];
            v[t] = values[t * envs + i];
            d[t] = dones[t * envs + i];
        }
        let (a, g) = compute_gae(&r, &v, &d, bootstrap[i], gamma, lambda)?;
        for t in 0..steps {
            adv[t * envs + i] = a[t];
            ret[t * envs + i] = g[t];
        }
    }
    Ok((adv, ret))
}

/// Shifts and scales in place to zero mean and unit (population) std.
pub fn normalize_advantages(adv: &mut [f64]) {
    let n = adv.len();
    if n < 2 {
        return;
    }
    let mean = adv.iter().sum::<f64>() / n as f64;
    let var = adv.iter().map(|a| (a - mean).powi(2)).sum::<f64>() / n as f64;
    let std = var.sqrt();
    let scale = if std > 1e-12 { 1.0 / std } else { 1.0 };
    adv.iter_mut().for_each(|a| *a = (*a - mean) * scale);
}
