//! The full trainable parameter set: encoder, adaptation module, policy body,
//! value net and the state-independent action log-std.

use ndarray::{Array1, Array2, ArrayView2};
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::init::init_mlp;
use super::mlp::{Mlp, NetworkShape, Real};
use crate::error::{Error, Result};
use crate::sim::{ACTION_DIM, DOMAIN_DIM, HISTORY_LEN, INPUT_DIM};

pub const LATENT_DIM: usize = 8;

/// Network widths. Input and output sizes follow from the simulator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ArchConfig {
    pub encoder_hidden: Vec<usize>,
    pub adaptation_hidden: Vec<usize>,
    pub body_hidden: Vec<usize>,
    pub value_hidden: Vec<usize>,
    pub latent_dim: usize,
    pub history_len: usize,
    pub init_log_std: f64,
    pub hidden_gain: f64,
    pub body_output_gain: f64,
}

impl Default for ArchConfig {
    fn default() -> Self {
        Self {
            encoder_hidden: vec![256, 128],
            adaptation_hidden: vec![256, 32],
            body_hidden: vec![512, 256, 128],
            value_hidden: vec![256, 128],
            latent_dim: LATENT_DIM,
            history_len: HISTORY_LEN,
            init_log_std: 0.5f64.ln(),
            hidden_gain: 1.0,
            body_output_gain: 0.01,
        }
    }
}

impl ArchConfig {
    /// Tiny widths for tests.
    pub fn small() -> Self {
        Self {
            encoder_hidden: vec![16, 8],
            adaptation_hidden: vec![16, 8],
            body_hidden: vec![16, 16],
            value_hidden: vec![16],
            ..Self::default()
        }
    }

    pub fn encoder_shape(&self) -> NetworkShape {
        NetworkShape::new(DOMAIN_DIM, &self.encoder_hidden, self.latent_dim)
    }

    pub fn adaptation_shape(&self) -> NetworkShape {
        NetworkShape::new(self.history_len * INPUT_DIM, &self.adaptation_hidden, self.latent_dim)
    }

    pub fn body_shape(&self) -> NetworkShape {
        NetworkShape::new(INPUT_DIM + self.latent_dim, &self.body_hidden, ACTION_DIM)
    }

    pub fn value_shape(&self) -> NetworkShape {
        NetworkShape::new(INPUT_DIM + self.latent_dim, &self.value_hidden, 1)
    }

    pub fn validate(&self) -> Result<()> {
        if self.latent_dim == 0 || self.history_len == 0 {
            return Err(Error::InvalidConfig("latent_dim and history_len must be >= 1".into()));
        }
        if !self.init_log_std.is_finite() {
            return Err(Error::InvalidConfig("init_log_std must be finite".into()));
        }
        for s in [self.encoder_shape(), self.adaptation_shape(), self.body_shape(), self.value_shape()] {
            s.validate()?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParameterSet<T> {
    pub encoder: Mlp<T>,
    pub adaptation: Mlp<T>,
    pub body: Mlp<T>,
    pub value: Mlp<T>,
    pub log_std: Array1<T>,
}

impl<T: Real> ParameterSet<T> {
    pub fn init<R: Rng + ?Sized>(arch: &ArchConfig, rng: &mut R) -> Result<Self> {
        arch.validate()?;
        let g = arch.hidden_gain;
        Ok(Self {
            encoder: init_mlp(&arch.encoder_shape(), g, g, rng)?,
            adaptation: init_mlp(&arch.adaptation_shape(), g, g, rng)?,
            body: init_mlp(&arch.body_shape(), g, arch.body_output_gain, rng)?,
            value: init_mlp(&arch.value_shape(), g, g, rng)?,
            log_std: Array1::from_elem(ACTION_DIM, T::of(arch.init_log_std)),
        })
    }

    pub fn zeros(arch: &ArchConfig) -> Result<Self> {
        arch.validate()?;
        Ok(Self {
            encoder: Mlp::zeros(&arch.encoder_shape())?,
            adaptation: Mlp::zeros(&arch.adaptation_shape())?,
            body: Mlp::zeros(&arch.body_shape())?,
            value: Mlp::zeros(&arch.value_shape())?,
            log_std: Array1::zeros(ACTION_DIM),
        })
    }

    pub fn latent_dim(&self) -> usize {
        self.encoder.output_dim()
    }

    pub fn history_len(&self) -> usize {
        self.adaptation.input_dim() / INPUT_DIM
    }

    /// z = g(d) for a batch of normalized domain vectors.
    pub fn encoder_forward(&self, d: ArrayView2<T>) -> Result<Array2<T>> {
        self.encoder.forward(d)
    }

    /// ẑ = h(history) for a batch of flattened `[history_len * INPUT_DIM]`
    /// windows, oldest first.
    pub fn adaptation_forward(&self, history: ArrayView2<T>) -> Result<Array2<T>> {
        if history.ncols() != self.adaptation.input_dim() {
            return Err(Error::DimensionMismatch {
                context: "adaptation history",
                expected: self.adaptation.input_dim(),
                actual: history.ncols(),
            });
        }
        self.adaptation.forward(history)
    }

    /// Action means for `x ⊕ z`.
    pub fn policy_forward(&self, x: ArrayView2<T>, z: ArrayView2<T>) -> Result<Array2<T>> {
        self.body.forward(concat_cols(x, z)?.view())
    }

    pub fn value_forward(&self, x: ArrayView2<T>, z: ArrayView2<T>) -> Result<Array1<T>> {
        let v = self.value.forward(concat_cols(x, z)?.view())?;
        Ok(v.column(0).to_owned())
    }

    pub fn is_finite(&self) -> bool {
        self.slices().iter().all(|s| s.iter().all(|v| v.is_finite()))
    }

    pub fn num_params(&self) -> usize {
        self.slices().iter().map(|s| s.len()).sum()
    }

    /// Every buffer in a fixed order: encoder, adaptation, body, value, log_std.
    pub fn slices(&self) -> Vec<&[T]> {
        let mut v = self.encoder.slices();
        v.extend(self.adaptation.slices());
        v.extend(self.body.slices());
        v.extend(self.value.slices());
        v.push(self.log_std.as_slice().expect("contiguous"));
        v
    }

    pub fn slices_mut(&mut self) -> Vec<&mut [T]> {
        let mut v = self.encoder.slices_mut();
        v.extend(self.adaptation.slices_mut());
        v.extend(self.body.slices_mut());
        v.extend(self.value.slices_mut());
        v.push(self.log_std.as_slice_mut().expect("contiguous"));
        v
    }

    pub fn cast<U: Real>(&self) -> ParameterSet<U> {
        ParameterSet {
            encoder: self.encoder.cast(),
            adaptation: self.adaptation.cast(),
            body: self.body.cast(),
            value: self.value.cast(),
            log_std: self.log_std.mapv(|v| U::of(v.as_f64())),
        }
    }
}

/// Horizontal concatenation of two row-aligned batches.
pub fn concat_cols<T: Real>(a: ArrayView2<T>, b: ArrayView2<T>) -> Result<Array2<T>> {
    if a.nrows() != b.nrows() {
        return Err(Error::DimensionMismatch {
            context: "row count of concatenated inputs",
            expected: a.nrows(),
            actual: b.nrows(),
        });
    }
    let mut out = Array2::zeros((a.nrows(), a.ncols() + b.ncols()));
    out.slice_mut(ndarray::s![.., ..a.ncols()]).assign(&a);
    out.slice_mut(ndarray::s![.., a.ncols()..]).assign(&b);
    Ok(out)
}

const LN_2PI: f64 = 1.837_877_066_409_345_3;

/// Log-density of a diagonal Gaussian.
pub fn gaussian_log_prob(mean: &[f64], log_std: &[f64], action: &[f64]) -> f64 {
    mean.iter()
        .zip(log_std)
        .zip(action)
        .map(|((m, ls), a)| {
            let z = (a - m) / ls.exp();
            -0.5 * z * z - ls - 0.5 * LN_2PI
        })
        .sum()
}

/// Entropy of a diagonal Gaussian.
pub fn gaussian_entropy(log_std: &[f64]) -> f64 {
    log_std.iter().map(|ls| ls + 0.5 * (LN_2PI + 1.0)).sum()
}
