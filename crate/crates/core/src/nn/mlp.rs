//! Dense ELU networks with exact reverse-mode gradients.

use ndarray::linalg::general_mat_mul;
use ndarray::{Array1, Array2, ArrayView2, Axis};
use num_traits::Float;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Scalar type the networks run in: `f32` for training, `f64` for checks.
pub trait Real:
    Float + num_traits::NumAssign + ndarray::LinalgScalar + ndarray::ScalarOperand + std::fmt::Debug + Send + Sync + 'static
{
    fn of(x: f64) -> Self;
    fn as_f64(self) -> f64;
}

impl Real for f32 {
    fn of(x: f64) -> Self {
        x as f32
    }
    fn as_f64(self) -> f64 {
        self as f64
    }
}

impl Real for f64 {
    fn of(x: f64) -> Self {
        x
    }
    fn as_f64(self) -> f64 {
        self
    }
}

/// ELU with unit scale.
#[inline]
pub fn elu<T: Real>(x: T) -> T {
    if x > T::zero() {
        x
    } else {
        x.exp() - T::one()
    }
}

/// Derivative of ELU written in terms of its output.
#[inline]
fn elu_grad_from_output<T: Real>(y: T) -> T {
    if y > T::zero() {
        T::one()
    } else {
        y + T::one()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NetworkShape {
    pub input_dim: usize,
    pub hidden_dims: Vec<usize>,
    pub output_dim: usize,
}

impl NetworkShape {
    pub fn new(input_dim: usize, hidden_dims: &[usize], output_dim: usize) -> Self {
        Self {
            input_dim,
            hidden_dims: hidden_dims.to_vec(),
            output_dim,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.input_dim == 0 || self.output_dim == 0 || self.hidden_dims.contains(&0) {
            return Err(Error::InvalidConfig(format!("network dims must be >= 1: {self:?}")));
        }
        Ok(())
    }

    /// `(in, out)` of every layer.
    pub fn layer_dims(&self) -> Vec<(usize, usize)> {
        let mut dims = Vec::with_capacity(self.hidden_dims.len() + 1);
        let mut prev = self.input_dim;
        for &h in &self.hidden_dims {
            dims.push((prev, h));
            prev = h;
        }
        dims.push((prev, self.output_dim));
        dims
    }
}

/// Affine layer `y = W x + b` with `W` stored as `[out, in]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Dense<T> {
    pub weight: Array2<T>,
    pub bias: Array1<T>,
}

impl<T: Real> Dense<T> {
    pub fn zeros(input: usize, output: usize) -> Self {
        Self {
            weight: Array2::zeros((output, input)),
            bias: Array1::zeros(output),
        }
    }

    pub fn in_dim(&self) -> usize {
        self.weight.ncols()
    }

    pub fn out_dim(&self) -> usize {
        self.weight.nrows()
    }
}

/// Multi-layer perceptron; ELU on hidden layers, identity on the output.
#[derive(Debug, Clone, PartialEq)]
pub struct Mlp<T> {
    layers: Vec<Dense<T>>,
}

/// Layer inputs recorded by [`Mlp::forward_recorded`]; `acts[0]` is the
/// network input, `acts[l]` the (post-ELU) input of layer `l`.
#[derive(Debug, Clone)]
pub struct ForwardCache<T> {
    acts: Vec<Array2<T>>,
}

impl<T> ForwardCache<T> {
    pub fn batch_size(&self) -> usize {
        self.acts[0].nrows()
    }
}

/// Gradients with the same layout as the network (accumulating).
#[derive(Debug, Clone, PartialEq)]
pub struct MlpGrads<T> {
    pub layers: Vec<Dense<T>>,
}

impl<T: Real> MlpGrads<T> {
    pub fn zero(&mut self) {
        for l in &mut self.layers {
            l.weight.fill(T::zero());
            l.bias.fill(T::zero());
        }
    }

    pub fn slices(&self) -> Vec<&[T]> {
        let mut v = Vec::with_capacity(self.layers.len() * 2);
        for l in &self.layers {
            v.push(l.weight.as_slice().expect("contiguous"));
            v.push(l.bias.as_slice().expect("contiguous"));
        }
        v
    }

    pub fn slices_mut(&mut self) -> Vec<&mut [T]> {
        let mut v = Vec::with_capacity(self.layers.len() * 2);
        for l in &mut self.layers {
            v.push(l.weight.as_slice_mut().expect("contiguous"));
            v.push(l.bias.as_slice_mut().expect("contiguous"));
        }
        v
    }
}

impl<T: Real> Mlp<T> {
    pub fn zeros(shape: &NetworkShape) -> Result<Self> {
        shape.validate()?;
        Ok(Self {
            layers: shape
                .layer_dims()
                .into_iter()
                .map(|(i, o)| Dense::zeros(i, o))
                .collect(),
        })
    }

    pub fn from_layers(layers: Vec<Dense<T>>) -> Result<Self> {
        if layers.is_empty() {
            return Err(Error::InvalidConfig("network needs at least one layer".into()));
        }
        for pair in layers.windows(2) {
            if pair[0].out_dim() != pair[1].in_dim() {
                return Err(Error::DimensionMismatch {
                    context: "layer chain",
                    expected: pair[0].out_dim(),
                    actual: pair[1].in_dim(),
                });
            }
        }
        Ok(Self { layers })
    }

    pub fn shape(&self) -> NetworkShape {
        NetworkShape {
            input_dim: self.input_dim(),
            hidden_dims: self.layers[..self.layers.len() - 1].iter().map(|l| l.out_dim()).collect(),
            output_dim: self.output_dim(),
        }
    }

    pub fn input_dim(&self) -> usize {
        self.layers[0].in_dim()
    }

    pub fn output_dim(&self) -> usize {
        self.layers[self.layers.len() - 1].out_dim()
    }

    pub fn layers(&self) -> &[Dense<T>] {
        &self.layers
    }

    pub fn layers_mut(&mut self) -> &mut [Dense<T>] {
        &mut self.layers
    }

    pub fn num_params(&self) -> usize {
        self.layers.iter().map(|l| l.weight.len() + l.bias.len()).sum()
    }

    pub fn grads(&self) -> MlpGrads<T> {
        MlpGrads {
            layers: self.layers.iter().map(|l| Dense::zeros(l.in_dim(), l.out_dim())).collect(),
        }
    }

    /// Weight and bias buffers in layer order.
    pub fn slices(&self) -> Vec<&[T]> {
        let mut v = Vec::with_capacity(self.layers.len() * 2);
        for l in &self.layers {
            v.push(l.weight.as_slice().expect("contiguous"));
            v.push(l.bias.as_slice().expect("contiguous"));
        }
        v
    }

    pub fn slices_mut(&mut self) -> Vec<&mut [T]> {
        let mut v = Vec::with_capacity(self.layers.len() * 2);
        for l in &mut self.layers {
            v.push(l.weight.as_slice_mut().expect("contiguous"));
            v.push(l.bias.as_slice_mut().expect("contiguous"));
        }
        v
    }

    fn check_input(&self, x: &ArrayView2<T>) -> Result<()> {
        if x.ncols() != self.input_dim() {
            return Err(Error::DimensionMismatch {
                context: "mlp input",
                expected: self.input_dim(),
                actual: x.ncols(),
            });
        }
        Ok(())
    }

    fn layer_forward(&self, l: usize, x: &ArrayView2<T>) -> Array2<T> {
        let layer = &self.layers[l];
        let mut y = Array2::zeros((x.nrows(), layer.out_dim()));
        y += &layer.bias;
        general_mat_mul(T::one(), x, &layer.weight.t(), T::one(), &mut y);
        if l + 1 < self.layers.len() {
            y.mapv_inplace(elu);
        }
        y
    }

    /// Batched forward pass; rows are samples.
    pub fn forward(&self, x: ArrayView2<T>) -> Result<Array2<T>> {
        self.check_input(&x)?;
        let mut h = self.layer_forward(0, &x);
        for l in 1..self.layers.len() {
            h = self.layer_forward(l, &h.view());
        }
        Ok(h)
    }

    /// Forward pass that records what the backward pass needs.
    pub fn forward_recorded(&self, x: ArrayView2<T>) -> Result<(Array2<T>, ForwardCache<T>)> {
        self.check_input(&x)?;
        let mut acts = Vec::with_capacity(self.layers.len());
        acts.push(x.to_owned());
        for l in 0..self.layers.len() - 1 {
            let h = self.layer_forward(l, &acts[l].view());
            acts.push(h);
        }
        let out = self.layer_forward(self.layers.len() - 1, &acts[self.layers.len() - 1].view());
        Ok((out, ForwardCache { acts }))
    }

    /// Back-propagates `d_out` (dLoss/dOutput), adding parameter gradients
    /// into `grads`. Returns dLoss/dInput when `want_input_grad`.
    pub fn backward(
        &self,
        cache: &ForwardCache<T>,
        d_out: ArrayView2<T>,
        grads: &mut MlpGrads<T>,
        want_input_grad: bool,
    ) -> Result<Option<Array2<T>>> {
        if d_out.nrows() != cache.batch_size() || d_out.ncols() != self.output_dim() {
            return Err(Error::DimensionMismatch {
                context: "mlp backward seed",
                expected: self.output_dim(),
                actual: d_out.ncols(),
            });
        }
        let n = self.layers.len();
        let mut dz = d_out.to_owned();
        for l in (0..n).rev() {
            let input = &cache.acts[l];
            let g = &mut grads.layers[l];
            general_mat_mul(T::one(), &dz.t(), input, T::one(), &mut g.weight);
            g.bias += &dz.sum_axis(Axis(0));
            if l == 0 && !want_input_grad {
                return Ok(None);
            }
            let mut dx = Array2::zeros((dz.nrows(), self.layers[l].in_dim()));
            general_mat_mul(T::one(), &dz, &self.layers[l].weight, T::zero(), &mut dx);
            if l > 0 {
                // input of layer l is the ELU output of layer l-1
                ndarray::Zip::from(&mut dx)
                    .and(input)
                    .for_each(|d, &y| *d = *d * elu_grad_from_output(y));
            }
            dz = dx;
        }
        Ok(Some(dz))
    }

    /// Gradients of a scalar network output. Errors unless the recorded
    /// output is a single value.
    pub fn backward_scalar(&self, cache: &ForwardCache<T>, grads: &mut MlpGrads<T>) -> Result<Array2<T>> {
        let rows = cache.batch_size();
        let cols = self.output_dim();
        if rows != 1 || cols != 1 {
            return Err(Error::NonScalarLoss { rows, cols });
        }
        let seed = Array2::from_elem((1, 1), T::one());
        Ok(self
            .backward(cache, seed.view(), grads, true)?
            .expect("input gradient requested"))
    }

    /// Upper bound on the Lipschitz constant of the network over the input
    /// columns in `cols` (Frobenius norms; ELU is 1-Lipschitz).
    pub fn lipschitz_bound(&self, cols: std::ops::Range<usize>) -> f64 {
        let first = &self.layers[0].weight;
        let mut bound = first
            .columns()
            .into_iter()
            .enumerate()
            .filter(|(j, _)| cols.contains(j))
            .map(|(_, c)| c.iter().map(|v| v.as_f64().powi(2)).sum::<f64>())
            .sum::<f64>()
            .sqrt();
        for l in &self.layers[1..] {
            bound *= l.weight.iter().map(|v| v.as_f64().powi(2)).sum::<f64>().sqrt();
        }
        bound
    }

    pub fn cast<U: Real>(&self) -> Mlp<U> {
        Mlp {
            layers: self
                .layers
                .iter()
                .map(|l| Dense {
                    weight: l.weight.mapv(|v| U::of(v.as_f64())),
                    bias: l.bias.mapv(|v| U::of(v.as_f64())),
                })
                .collect(),
        }
    }
}
