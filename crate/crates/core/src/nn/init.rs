use ndarray::{Array1, Array2};
use rand::Rng;
use rand_distr::StandardNormal;

use super::mlp::{Dense, Mlp, NetworkShape, Real};
use crate::error::Result;

/// `[rows, cols]` matrix with orthonormal rows or columns (whichever set is
/// smaller), scaled by `gain`.
pub fn orthogonal<R: Rng + ?Sized>(rows: usize, cols: usize, gain: f64, rng: &mut R) -> Array2<f64> {
    let (tall, short) = (rows.max(cols), rows.min(cols));
    // Gram-Schmidt over `short` Gaussian vectors of length `tall`.
    let mut q: Vec<Vec<f64>> = Vec::with_capacity(short);
    while q.len() < short {
        let mut v: Vec<f64> = (0..tall).map(|_| rng.sample(StandardNormal)).collect();
        for _ in 0..2 {
            for u in &q {
                let d: f64 = v.iter().zip(u).map(|(a, b)| a * b).sum();
                v.iter_mut().zip(u).for_each(|(a, b)| *a -= d * b);
            }
        }
        let norm = v.iter().map(|a| a * a).sum::<f64>().sqrt();
        if norm > 1e-8 {
            v.iter_mut().for_each(|a| *a /= norm);
            q.push(v);
        }
    }
    let mut m = Array2::zeros((rows, cols));
    for (k, u) in q.iter().enumerate() {
        for (t, &val) in u.iter().enumerate() {
            if rows >= cols {
                m[[t, k]] = gain * val;
            } else {
                m[[k, t]] = gain * val;
            }
        }
    }
    m
}

/// Orthogonal weights, zero biases; `hidden_gain` on hidden layers and
/// `output_gain` on the final layer.
pub fn init_mlp<T: Real, R: Rng + ?Sized>(
    shape: &NetworkShape,
    hidden_gain: f64,
    output_gain: f64,
    rng: &mut R,
) -> Result<Mlp<T>> {
    shape.validate()?;
    let dims = shape.layer_dims();
    let last = dims.len() - 1;
    let layers = dims
        .into_iter()
        .enumerate()
        .map(|(l, (i, o))| {
            let gain = if l == last { output_gain } else { hidden_gain };
            Dense {
                weight: orthogonal(o, i, gain, rng).mapv(T::of),
                bias: Array1::zeros(o),
            }
        })
        .collect();
    Mlp::from_layers(layers)
}
