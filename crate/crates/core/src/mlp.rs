//! Fully connected feed-forward network with an MSE loss and exact
//! backpropagated gradients.
//!
//! Parameters live in one flat vector so the trainers can treat the network
//! as a plain objective. Layer `l` occupies a row-major `out × in` weight
//! block followed by `out` biases.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::Rows;
use crate::error::{Error, Result};
use crate::ingest::ClassLabel;
use crate::train::Objective;

/// Samples per gradient chunk. Chunk partial sums are added in chunk order,
/// so gradients are bit-identical regardless of thread count.
const CHUNK: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Activation {
    Tanh,
    Logistic,
    Identity,
}

impl Activation {
    #[inline]
    pub fn apply(self, z: f64) -> f64 {
        match self {
            Activation::Tanh => z.tanh(),
            Activation::Logistic => 1.0 / (1.0 + (-z).exp()),
            Activation::Identity => z,
        }
    }

    /// Derivative expressed through the activation's output.
    #[inline]
    fn slope(self, a: f64) -> f64 {
        match self {
            Activation::Tanh => 1.0 - a * a,
            Activation::Logistic => a * (1.0 - a),
            Activation::Identity => 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LossReport {
    pub mse: f64,
    pub gradient: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(into = "MlpFile", try_from = "MlpFile")]
pub struct MlpModel {
    layer_sizes: Vec<usize>,
    hidden_activation: Activation,
    output_activation: Activation,
    params: Vec<f64>,
}

fn param_count(sizes: &[usize]) -> usize {
    sizes.windows(2).map(|w| w[0] * w[1] + w[1]).sum()
}

impl MlpModel {
    /// Glorot-uniform weights in `±sqrt(6 / (fan_in + fan_out))`, zero
    /// biases, tanh hidden units and logistic outputs.
    pub fn init(layer_sizes: &[usize], seed: u64) -> Result<Self> {
        let mut model = Self::zeros(layer_sizes)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut offset = 0;
        for w in layer_sizes.windows(2) {
            let (fan_in, fan_out) = (w[0], w[1]);
            let r = (6.0 / (fan_in + fan_out) as f64).sqrt();
            for p in &mut model.params[offset..offset + fan_in * fan_out] {
                *p = rng.random_range(-r..=r);
            }
            offset += fan_in * fan_out + fan_out;
        }
        Ok(model)
    }

    /// All parameters zero.
    pub fn zeros(layer_sizes: &[usize]) -> Result<Self> {
        if layer_sizes.len() < 2 {
            return Err(Error::InvalidConfig("a network needs at least an input and an output layer".into()));
        }
        if layer_sizes.contains(&0) {
            return Err(Error::InvalidConfig("layer sizes must be at least 1".into()));
        }
        Ok(Self {
            layer_sizes: layer_sizes.to_vec(),
            hidden_activation: Activation::Tanh,
            output_activation: Activation::Logistic,
            params: vec![0.0; param_count(layer_sizes)],
        })
    }

    pub fn with_activations(mut self, hidden: Activation, output: Activation) -> Self {
        self.hidden_activation = hidden;
        self.output_activation = output;
        self
    }

    pub fn layer_sizes(&self) -> &[usize] {
        &self.layer_sizes
    }

    pub fn input_dim(&self) -> usize {
        self.layer_sizes[0]
    }

    pub fn output_dim(&self) -> usize {
        *self.layer_sizes.last().unwrap()
    }

    pub fn hidden_activation(&self) -> Activation {
        self.hidden_activation
    }

    pub fn output_activation(&self) -> Activation {
        self.output_activation
    }

    pub fn num_params(&self) -> usize {
        self.params.len()
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn set_params(&mut self, params: Vec<f64>) -> Result<()> {
        if params.len() != self.params.len() {
            return Err(Error::DimensionMismatch {
                expected: self.params.len(),
                found: params.len(),
            });
        }
        if params.iter().any(|p| !p.is_finite()) {
            return Err(Error::InvalidConfig("network parameters must be finite".into()));
        }
        self.params = params;
        Ok(())
    }

    /// Weight block `(out × in)` and biases of layer `l`.
    pub fn layer<'p>(&self, params: &'p [f64], l: usize) -> (&'p [f64], &'p [f64]) {
        let offset: usize = self.layer_sizes[..l + 1].windows(2).map(|w| w[0] * w[1] + w[1]).sum();
        let (fan_in, fan_out) = (self.layer_sizes[l], self.layer_sizes[l + 1]);
        let w = &params[offset..offset + fan_in * fan_out];
        let b = &params[offset + fan_in * fan_out..offset + fan_in * fan_out + fan_out];
        (w, b)
    }

    fn activation(&self, l: usize) -> Activation {
        if l + 2 == self.layer_sizes.len() {
            self.output_activation
        } else {
            self.hidden_activation
        }
    }

    fn check_input(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.input_dim() {
            return Err(Error::DimensionMismatch {
                expected: self.input_dim(),
                found: x.len(),
            });
        }
        Ok(())
    }

    /// Activations of every layer, input first.
    fn forward_all(&self, params: &[f64], x: &[f64], acts: &mut Vec<Vec<f64>>) {
        acts.resize(self.layer_sizes.len(), Vec::new());
        acts[0].clear();
        acts[0].extend_from_slice(x);
        for l in 0..self.layer_sizes.len() - 1 {
            let (w, b) = self.layer(params, l);
            let f = self.activation(l);
            let fan_in = self.layer_sizes[l];
            let (prev, next) = acts.split_at_mut(l + 1);
            let input = &prev[l];
            let out = &mut next[0];
            out.clear();
            out.extend(w.chunks_exact(fan_in).zip(b).map(|(row, bias)| {
                let z: f64 = row.iter().zip(input).map(|(a, c)| a * c).sum::<f64>() + bias;
                f.apply(z)
            }));
        }
    }

    pub fn forward(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check_input(x)?;
        let mut acts = Vec::new();
        self.forward_all(&self.params, x, &mut acts);
        Ok(acts.pop().unwrap())
    }

    fn check_batch(&self, x: Rows<'_>, y: Rows<'_>) -> Result<()> {
        if x.dim() != self.input_dim() {
            return Err(Error::DimensionMismatch {
                expected: self.input_dim(),
                found: x.dim(),
            });
        }
        if y.dim() != self.output_dim() {
            return Err(Error::DimensionMismatch {
                expected: self.output_dim(),
                found: y.dim(),
            });
        }
        if x.len() != y.len() {
            return Err(Error::DimensionMismatch {
                expected: x.len(),
                found: y.len(),
            });
        }
        if x.is_empty() {
            return Err(Error::Empty("training batch"));
        }
        Ok(())
    }

    /// Mean squared error over every sample and output.
    pub fn mse(&self, x: Rows<'_>, y: Rows<'_>) -> Result<f64> {
        self.mse_at(&self.params, x, y)
    }

    pub(crate) fn mse_at(&self, params: &[f64], x: Rows<'_>, y: Rows<'_>) -> Result<f64> {
        self.check_batch(x, y)?;
        let n = x.len();
        let sse: f64 = (0..n.div_ceil(CHUNK))
            .into_par_iter()
            .map(|c| {
                let mut acts = Vec::new();
                let mut sse = 0.0;
                for i in c * CHUNK..((c + 1) * CHUNK).min(n) {
                    self.forward_all(params, x.row(i), &mut acts);
                    sse += acts.last().unwrap().iter().zip(y.row(i)).map(|(o, t)| (o - t).powi(2)).sum::<f64>();
                }
                sse
            })
            .collect::<Vec<_>>()
            .into_iter()
            .sum();
        Ok(sse / (n * self.output_dim()) as f64)
    }

    pub fn loss_and_gradient(&self, x: Rows<'_>, y: Rows<'_>) -> Result<LossReport> {
        self.loss_and_gradient_at(&self.params, x, y)
    }

    /// MSE and its exact gradient with `params` substituted for the model's own.
    pub fn loss_and_gradient_at(&self, params: &[f64], x: Rows<'_>, y: Rows<'_>) -> Result<LossReport> {
        self.check_batch(x, y)?;
        if params.len() != self.params.len() {
            return Err(Error::DimensionMismatch {
                expected: self.params.len(),
                found: params.len(),
            });
        }
        let n = x.len();
        let partials: Vec<(f64, Vec<f64>)> = (0..n.div_ceil(CHUNK))
            .into_par_iter()
            .map(|c| self.chunk_gradient(params, x, y, c * CHUNK..((c + 1) * CHUNK).min(n)))
            .collect();
        let mut sse = 0.0;
        let mut gradient = vec![0.0; params.len()];
        for (s, g) in partials {
            sse += s;
            gradient.iter_mut().zip(&g).for_each(|(a, b)| *a += b);
        }
        let scale = 1.0 / (n * self.output_dim()) as f64;
        gradient.iter_mut().for_each(|g| *g *= 2.0 * scale);
        Ok(LossReport {
            mse: sse * scale,
            gradient,
        })
    }

    fn chunk_gradient(&self, params: &[f64], x: Rows<'_>, y: Rows<'_>, range: std::ops::Range<usize>) -> (f64, Vec<f64>) {
        let layers = self.layer_sizes.len() - 1;
        let offsets: Vec<usize> = std::iter::once(0)
            .chain(self.layer_sizes.windows(2).scan(0, |acc, w| {
                *acc += w[0] * w[1] + w[1];
                Some(*acc)
            }))
            .collect();
        let mut grad = vec![0.0; params.len()];
        let mut acts = Vec::new();
        let mut delta: Vec<f64> = Vec::new();
        let mut back: Vec<f64> = Vec::new();
        let mut sse = 0.0;
        for i in range {
            self.forward_all(params, x.row(i), &mut acts);
            let out = &acts[layers];
            let f_out = self.output_activation;
            delta.clear();
            for (o, t) in out.iter().zip(y.row(i)) {
                let e = o - t;
                sse += e * e;
                delta.push(e * f_out.slope(*o));
            }
            for l in (0..layers).rev() {
                let (fan_in, fan_out) = (self.layer_sizes[l], self.layer_sizes[l + 1]);
                let input = &acts[l];
                let w_off = offsets[l];
                let b_off = w_off + fan_in * fan_out;
                for (j, d) in delta.iter().enumerate() {
                    let row = &mut grad[w_off + j * fan_in..w_off + (j + 1) * fan_in];
                    row.iter_mut().zip(input).for_each(|(g, a)| *g += d * a);
                    grad[b_off + j] += d;
                }
                if l > 0 {
                    let w = &params[w_off..b_off];
                    let f = self.hidden_activation;
                    back.clear();
                    back.resize(fan_in, 0.0);
                    for (j, d) in delta.iter().enumerate() {
                        back.iter_mut().zip(&w[j * fan_in..(j + 1) * fan_in]).for_each(|(b, wj)| *b += d * wj);
                    }
                    for (b, a) in back.iter_mut().zip(input) {
                        *b *= f.slope(*a);
                    }
                    std::mem::swap(&mut delta, &mut back);
                }
            }
        }
        (sse, grad)
    }

    /// Index of the largest output; ties go to the lowest index.
    pub fn predict_index(&self, x: &[f64]) -> Result<usize> {
        let out = self.forward(x)?;
        Ok(argmax(&out))
    }

    /// Five-way class prediction (outputs in class-number order).
    pub fn predict_class(&self, x: &[f64]) -> Result<ClassLabel> {
        let idx = self.predict_index(x)?;
        ClassLabel::from_index(idx).ok_or(Error::DimensionMismatch {
            expected: ClassLabel::ALL.len(),
            found: self.output_dim(),
        })
    }
}

/// First index of the maximum value.
pub fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, v) in values.iter().enumerate() {
        if *v > values[best] {
            best = i;
        }
    }
    best
}

/// A network and a fixed batch seen as a function of the parameters.
pub struct MlpObjective<'a> {
    pub model: &'a MlpModel,
    pub x: Rows<'a>,
    pub y: Rows<'a>,
}

impl Objective for MlpObjective<'_> {
    fn dim(&self) -> usize {
        self.model.num_params()
    }

    fn loss(&self, params: &[f64]) -> Result<f64> {
        self.model.mse_at(params, self.x, self.y)
    }

    fn loss_and_gradient(&self, params: &[f64]) -> Result<(f64, Vec<f64>)> {
        let r = self.model.loss_and_gradient_at(params, self.x, self.y)?;
        Ok((r.mse, r.gradient))
    }
}

/// On-disk layout: layer sizes, activation names, row-major weights.
#[derive(Serialize, Deserialize)]
struct MlpFile {
    layer_sizes: Vec<usize>,
    hidden_activation: Activation,
    output_activation: Activation,
    layers: Vec<LayerFile>,
}

#[derive(Serialize, Deserialize)]
struct LayerFile {
    weights: Vec<Vec<f64>>,
    biases: Vec<f64>,
}

impl From<MlpModel> for MlpFile {
    fn from(m: MlpModel) -> Self {
        let layers = (0..m.layer_sizes.len() - 1)
            .map(|l| {
                let (w, b) = m.layer(&m.params, l);
                LayerFile {
                    weights: w.chunks_exact(m.layer_sizes[l]).map(<[f64]>::to_vec).collect(),
                    biases: b.to_vec(),
                }
            })
            .collect();
        MlpFile {
            layer_sizes: m.layer_sizes,
            hidden_activation: m.hidden_activation,
            output_activation: m.output_activation,
            layers,
        }
    }
}

impl TryFrom<MlpFile> for MlpModel {
    type Error = Error;

    fn try_from(f: MlpFile) -> Result<Self> {
        let mut model = MlpModel::zeros(&f.layer_sizes)?.with_activations(f.hidden_activation, f.output_activation);
        if f.layers.len() + 1 != f.layer_sizes.len() {
            return Err(Error::DimensionMismatch {
                expected: f.layer_sizes.len() - 1,
                found: f.layers.len(),
            });
        }
        let mut params = Vec::with_capacity(model.num_params());
        for (l, layer) in f.layers.iter().enumerate() {
            let (fan_in, fan_out) = (f.layer_sizes[l], f.layer_sizes[l + 1]);
            if layer.weights.len() != fan_out || layer.weights.iter().any(|r| r.len() != fan_in) || layer.biases.len() != fan_out {
                return Err(Error::DimensionMismatch {
                    expected: fan_in * fan_out + fan_out,
                    found: layer.weights.iter().map(Vec::len).sum::<usize>() + layer.biases.len(),
                });
            }
            layer.weights.iter().for_each(|r| params.extend_from_slice(r));
            params.extend_from_slice(&layer.biases);
        }
        model.set_params(params)?;
        Ok(model)
    }
}
