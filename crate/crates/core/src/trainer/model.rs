use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::error::{bail, Result};
use crate::math::sqrt;
use crate::matrix::Matrix;
use crate::metrics::Embedder;
use crate::rng::stream_rng;

/// FNV-1a over the layer sizes, as 16 hex digits.
pub fn fingerprint_of(sizes: &[usize]) -> String {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for &s in sizes {
        for b in (s as u64).to_le_bytes() {
            h ^= u64::from(b);
            h = h.wrapping_mul(0x0000_0100_0000_01b3);
        }
    }
    format!("{h:016x}")
}

/// Feed-forward embedding: affine layers with ReLU in between, no activation
/// after the last layer.
///
/// Parameters are stored flat, layer by layer: the `in x out` weight matrix
/// (row-major) followed by the `out` biases. `sizes = [d_in]` is the
/// zero-depth model, i.e. the identity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmbeddingModel {
    sizes: Vec<usize>,
    params: Vec<f64>,
}

/// Activations kept from a forward pass for backpropagation.
#[derive(Debug, Clone)]
pub struct ForwardCache {
    /// Input of every layer (post-ReLU for all but the first).
    inputs: Vec<Matrix>,
    pub output: Matrix,
}

fn param_count(sizes: &[usize]) -> usize {
    sizes.windows(2).map(|w| w[0] * w[1] + w[1]).sum()
}

impl EmbeddingModel {
    /// Seeded init: every weight and bias uniform in `±1/sqrt(fan_in)`.
    pub fn new(sizes: &[usize], seed: u64) -> Result<Self> {
        check_sizes(sizes)?;
        let mut rng = stream_rng(seed, 0);
        let mut params = Vec::with_capacity(param_count(sizes));
        for w in sizes.windows(2) {
            let bound = 1.0 / sqrt(w[0] as f64);
            for _ in 0..w[0] * w[1] + w[1] {
                params.push(rng.random_range(-bound..=bound));
            }
        }
        Ok(Self { sizes: sizes.to_vec(), params })
    }

    pub fn from_params(sizes: &[usize], params: Vec<f64>) -> Result<Self> {
        check_sizes(sizes)?;
        if params.len() != param_count(sizes) {
            bail!(Shape, "layer sizes {sizes:?} need {} parameters, got {}", param_count(sizes), params.len());
        }
        Ok(Self { sizes: sizes.to_vec(), params })
    }

    pub fn identity(dim: usize) -> Result<Self> {
        Self::from_params(&[dim], Vec::new())
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut [f64] {
        &mut self.params
    }

    pub fn param_count(&self) -> usize {
        self.params.len()
    }

    pub fn depth(&self) -> usize {
        self.sizes.len() - 1
    }

    pub fn input_dim(&self) -> usize {
        self.sizes[0]
    }

    pub fn output_dim(&self) -> usize {
        *self.sizes.last().expect("sizes is non-empty")
    }

    pub fn fingerprint(&self) -> String {
        fingerprint_of(&self.sizes)
    }

    fn layer(&self, l: usize) -> (&[f64], &[f64], usize, usize) {
        let offset: usize = param_count(&self.sizes[..=l]);
        let (din, dout) = (self.sizes[l], self.sizes[l + 1]);
        let w = &self.params[offset..offset + din * dout];
        let b = &self.params[offset + din * dout..offset + din * dout + dout];
        (w, b, din, dout)
    }

    pub fn forward(&self, x: &Matrix) -> Result<Matrix> {
        Ok(self.forward_cached(x)?.output)
    }

    pub fn forward_cached(&self, x: &Matrix) -> Result<ForwardCache> {
        if x.cols() != self.input_dim() {
            bail!(Shape, "model expects {} input features, got {}", self.input_dim(), x.cols());
        }
        let mut inputs = Vec::with_capacity(self.depth());
        let mut a = x.clone();
        for l in 0..self.depth() {
            let (w, b, _, dout) = self.layer(l);
            let mut z = a.matmul(&Matrix::new(a.cols(), dout, w.to_vec())?)?.add_row_vector(b)?;
            if l + 1 < self.depth() {
                z = z.map(|v| v.max(0.0));
            }
            inputs.push(a);
            a = z;
        }
        Ok(ForwardCache { inputs, output: a })
    }

    /// Returns `(parameter gradient, input gradient)` given `d_out = dL/d(output)`.
    pub fn backward(&self, cache: &ForwardCache, d_out: &Matrix) -> Result<(Vec<f64>, Matrix)> {
        if d_out.rows() != cache.output.rows() || d_out.cols() != cache.output.cols() {
            bail!(Shape, "output gradient is {}x{}, output is {}x{}", d_out.rows(), d_out.cols(), cache.output.rows(), cache.output.cols());
        }
        let mut grads = vec![0.0; self.params.len()];
        let mut dz = d_out.clone();
        for l in (0..self.depth()).rev() {
            let (w, _, din, dout) = self.layer(l);
            let a = &cache.inputs[l];
            let offset = param_count(&self.sizes[..=l]);
            let (gw, gb) = grads[offset..offset + din * dout + dout].split_at_mut(din * dout);
            let mut da = Matrix::zeros(a.rows(), din);
            for i in 0..a.rows() {
                let dzi = dz.row(i);
                for (o, g) in gb.iter_mut().enumerate() {
                    *g += dzi[o];
                }
                let ai = a.row(i);
                let dai = da.row_mut(i);
                for t in 0..din {
                    let wt = &w[t * dout..(t + 1) * dout];
                    let gwt = &mut gw[t * dout..(t + 1) * dout];
                    let mut acc = 0.0;
                    for o in 0..dout {
                        gwt[o] += ai[t] * dzi[o];
                        acc += dzi[o] * wt[o];
                    }
                    dai[t] = acc;
                }
            }
            if l > 0 {
                // ReLU mask: the layer input is a post-activation value
                for (g, &v) in da.as_mut_slice().iter_mut().zip(a.as_slice()) {
                    if v <= 0.0 {
                        *g = 0.0;
                    }
                }
            }
            dz = da;
        }
        Ok((grads, dz))
    }
}

fn check_sizes(sizes: &[usize]) -> Result<()> {
    if sizes.is_empty() || sizes.contains(&0) {
        bail!(Argument, "layer sizes must be non-empty and positive, got {sizes:?}");
    }
    Ok(())
}

impl Embedder for EmbeddingModel {
    fn embed(&self, x: &Matrix) -> Result<Matrix> {
        self.forward(x)
    }

    fn fingerprint(&self) -> String {
        EmbeddingModel::fingerprint(self)
    }
}
