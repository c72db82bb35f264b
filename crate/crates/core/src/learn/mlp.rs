//! Fully connected network with tanh hidden layers and a linear output layer.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::LearnError;

#[derive(Debug, Clone, PartialEq)]
pub struct Layer {
    /// `out × in`
    pub weights: DMatrix<f64>,
    pub bias: DVector<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Mlp {
    layers: Vec<Layer>,
}

/// Per-dimension affine map `z = (x − mean) / std`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Normalizer {
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
    /// Range seen when fitting, used for the extrapolation check.
    pub min: Vec<f64>,
    pub max: Vec<f64>,
}

impl Normalizer {
    /// Standardisation fitted to `rows`. Dimensions with no spread get `std = 1`.
    pub fn fit(rows: &[Vec<f64>]) -> Self {
        let dim = rows.first().map_or(0, Vec::len);
        let n = rows.len().max(1) as f64;
        let mut mean = vec![0.0; dim];
        let mut min = vec![f64::INFINITY; dim];
        let mut max = vec![f64::NEG_INFINITY; dim];
        for r in rows {
            for d in 0..dim {
                mean[d] += r[d] / n;
                min[d] = min[d].min(r[d]);
                max[d] = max[d].max(r[d]);
            }
        }
        let mut std = vec![0.0; dim];
        for r in rows {
            for d in 0..dim {
                std[d] += (r[d] - mean[d]).powi(2) / n;
            }
        }
        for s in &mut std {
            *s = s.sqrt();
            if !(*s > 1e-12) {
                *s = 1.0;
            }
        }
        Self { mean, std, min, max }
    }

    pub fn identity(dim: usize) -> Self {
        Self { mean: vec![0.0; dim], std: vec![1.0; dim], min: vec![-1.0; dim], max: vec![1.0; dim] }
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    pub fn normalize(&self, x: &[f64]) -> Vec<f64> {
        x.iter().zip(self.mean.iter().zip(&self.std)).map(|(v, (m, s))| (v - m) / s).collect()
    }

    pub fn denormalize(&self, z: &[f64]) -> Vec<f64> {
        z.iter().zip(self.mean.iter().zip(&self.std)).map(|(v, (m, s))| v * s + m).collect()
    }

    /// True if every coordinate lies within twice the fitted range about its centre.
    pub fn in_domain(&self, x: &[f64]) -> bool {
        x.iter().enumerate().all(|(d, &v)| {
            let c = 0.5 * (self.min[d] + self.max[d]);
            let half = (self.max[d] - self.min[d]).max(1e-12);
            (v - c).abs() <= half
        })
    }

    fn validate(&self) -> Result<(), LearnError> {
        let d = self.mean.len();
        if self.std.len() != d || self.min.len() != d || self.max.len() != d {
            return Err(LearnError::Shape("normalizer vectors differ in length".into()));
        }
        if self.std.iter().any(|s| !(*s > 0.0 && s.is_finite())) || self.mean.iter().any(|m| !m.is_finite()) {
            return Err(LearnError::Shape("normalizer must be finite with positive scales".into()));
        }
        Ok(())
    }
}

/// Serialised form: `{sizes, weights (row-major per layer), biases}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MlpRepr {
    pub sizes: Vec<usize>,
    pub weights: Vec<Vec<f64>>,
    pub biases: Vec<Vec<f64>>,
}

/// Forward pass of a batch, keeping every layer's activation.
pub(crate) struct Trace {
    /// `acts[0]` is the input batch (n × in); `acts[l]` the output of layer l.
    pub acts: Vec<DMatrix<f64>>,
}

impl Mlp {
    /// Uniform ±1/√fan_in weights, zero biases.
    pub fn new_seeded(sizes: &[usize], seed: u64) -> Result<Self, LearnError> {
        if sizes.len() < 2 || sizes.contains(&0) {
            return Err(LearnError::Shape(format!("layer sizes {sizes:?} need ≥ 2 non-zero entries")));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let layers = sizes
            .windows(2)
            .map(|w| {
                let bound = 1.0 / (w[0] as f64).sqrt();
                Layer {
                    weights: DMatrix::from_fn(w[1], w[0], |_, _| rng.random_range(-bound..bound)),
                    bias: DVector::zeros(w[1]),
                }
            })
            .collect();
        Ok(Self { layers })
    }

    pub fn from_repr(r: &MlpRepr) -> Result<Self, LearnError> {
        if r.sizes.len() < 2 || r.weights.len() != r.sizes.len() - 1 || r.biases.len() != r.sizes.len() - 1 {
            return Err(LearnError::Shape(format!("inconsistent layer description for sizes {:?}", r.sizes)));
        }
        let mut layers = Vec::new();
        for (l, w) in r.sizes.windows(2).enumerate() {
            if r.weights[l].len() != w[0] * w[1] || r.biases[l].len() != w[1] {
                return Err(LearnError::Shape(format!("layer {l} has the wrong number of parameters")));
            }
            if r.weights[l].iter().chain(&r.biases[l]).any(|v| !v.is_finite()) {
                return Err(LearnError::Shape(format!("layer {l} has non-finite parameters")));
            }
            layers.push(Layer {
                weights: DMatrix::from_row_slice(w[1], w[0], &r.weights[l]),
                bias: DVector::from_column_slice(&r.biases[l]),
            });
        }
        Ok(Self { layers })
    }

    pub fn to_repr(&self) -> MlpRepr {
        MlpRepr {
            sizes: self.sizes(),
            weights: self.layers.iter().map(|l| l.weights.transpose().as_slice().to_vec()).collect(),
            biases: self.layers.iter().map(|l| l.bias.as_slice().to_vec()).collect(),
        }
    }

    pub fn layers(&self) -> &[Layer] {
        &self.layers
    }

    pub fn sizes(&self) -> Vec<usize> {
        let mut s = vec![self.layers[0].weights.ncols()];
        s.extend(self.layers.iter().map(|l| l.weights.nrows()));
        s
    }

    pub fn n_inputs(&self) -> usize {
        self.layers[0].weights.ncols()
    }

    pub fn n_outputs(&self) -> usize {
        self.layers.last().expect("non-empty").weights.nrows()
    }

    pub fn n_params(&self) -> usize {
        self.layers.iter().map(|l| l.weights.len() + l.bias.len()).sum()
    }

    /// Parameters flattened layer by layer: weights row-major, then biases.
    pub fn params(&self) -> Vec<f64> {
        let mut p = Vec::with_capacity(self.n_params());
        for l in &self.layers {
            for i in 0..l.weights.nrows() {
                p.extend(l.weights.row(i).iter());
            }
            p.extend(l.bias.iter());
        }
        p
    }

    pub fn set_params(&mut self, p: &[f64]) {
        assert_eq!(p.len(), self.n_params(), "parameter vector length");
        let mut k = 0;
        for l in &mut self.layers {
            let (rows, cols) = l.weights.shape();
            for i in 0..rows {
                for j in 0..cols {
                    l.weights[(i, j)] = p[k];
                    k += 1;
                }
            }
            for i in 0..rows {
                l.bias[i] = p[k];
                k += 1;
            }
        }
    }

    pub fn forward(&self, x: &[f64]) -> Vec<f64> {
        let mut a = DVector::from_column_slice(x);
        let last = self.layers.len() - 1;
        for (i, l) in self.layers.iter().enumerate() {
            a = &l.weights * a + &l.bias;
            if i < last {
                a.apply(|v| *v = v.tanh());
            }
        }
        a.as_slice().to_vec()
    }

    pub(crate) fn forward_batch(&self, x: &DMatrix<f64>) -> Trace {
        let mut acts = vec![x.clone()];
        let last = self.layers.len() - 1;
        for (i, l) in self.layers.iter().enumerate() {
            let mut z = acts[i].clone() * l.weights.transpose();
            for mut row in z.row_iter_mut() {
                row += l.bias.transpose();
            }
            if i < last {
                z.apply(|v| *v = v.tanh());
            }
            acts.push(z);
        }
        Trace { acts }
    }

    /// Mean squared error over all rows and outputs.
    pub fn loss(&self, x: &DMatrix<f64>, y: &DMatrix<f64>) -> f64 {
        let out = self.forward_batch(x).acts.pop().expect("output layer");
        (out - y).norm_squared() / y.len().max(1) as f64
    }

    /// Loss and its gradient with respect to [`Mlp::params`].
    pub fn loss_gradient(&self, x: &DMatrix<f64>, y: &DMatrix<f64>) -> (f64, Vec<f64>) {
        let trace = self.forward_batch(x);
        let out = trace.acts.last().expect("output layer");
        let err = out - y;
        let loss = err.norm_squared() / y.len().max(1) as f64;
        let mut delta = err * (2.0 / y.len().max(1) as f64);
        let mut grads: Vec<(DMatrix<f64>, DVector<f64>)> = Vec::with_capacity(self.layers.len());
        for l in (0..self.layers.len()).rev() {
            let gw = delta.transpose() * &trace.acts[l];
            let gb = DVector::from_iterator(delta.ncols(), delta.column_iter().map(|c| c.sum()));
            if l > 0 {
                let mut back = &delta * &self.layers[l].weights;
                back.zip_apply(&trace.acts[l], |d, a| *d *= 1.0 - a * a);
                delta = back;
            }
            grads.push((gw, gb));
        }
        grads.reverse();
        let mut g = Vec::with_capacity(self.n_params());
        for (gw, gb) in grads {
            for i in 0..gw.nrows() {
                g.extend(gw.row(i).iter());
            }
            g.extend(gb.iter());
        }
        (loss, g)
    }

    /// Residuals `out − y` (output-major: all rows of output 0, then output 1, …)
    /// and their Jacobian with respect to [`Mlp::params`].
    pub(crate) fn residual_jacobian(&self, x: &DMatrix<f64>, y: &DMatrix<f64>) -> (DVector<f64>, DMatrix<f64>) {
        let trace = self.forward_batch(x);
        let n = x.nrows();
        let n_out = self.n_outputs();
        let out = trace.acts.last().expect("output layer");
        let resid = DVector::from_iterator(n * n_out, (0..n_out).flat_map(|o| (0..n).map(move |r| (o, r))).map(|(o, r)| out[(r, o)] - y[(r, o)]));

        let offsets: Vec<usize> = self
            .layers
            .iter()
            .scan(0, |acc, l| {
                let start = *acc;
                *acc += l.weights.len() + l.bias.len();
                Some(start)
            })
            .collect();
        let mut jac = DMatrix::zeros(n * n_out, self.n_params());
        for o in 0..n_out {
            // delta: n × (layer width), derivative of output o w.r.t. pre-activations
            let mut delta = DMatrix::zeros(n, n_out);
            delta.column_mut(o).fill(1.0);
            for l in (0..self.layers.len()).rev() {
                let layer = &self.layers[l];
                let a = &trace.acts[l];
                let (rows, cols) = layer.weights.shape();
                let base = offsets[l];
                for i in 0..rows {
                    let d = delta.column(i);
                    for j in 0..cols {
                        let col = base + i * cols + j;
                        let mut target = jac.view_mut((o * n, col), (n, 1));
                        target.copy_from(&d.component_mul(&a.column(j)));
                    }
                    jac.view_mut((o * n, base + rows * cols + i), (n, 1)).copy_from(&d);
                }
                if l > 0 {
                    let mut back = &delta * &layer.weights;
                    back.zip_apply(a, |d, a| *d *= 1.0 - a * a);
                    delta = back;
                }
            }
        }
        (resid, jac)
    }
}

/// Network plus input/output normalizers: maps raw SI inputs to raw outputs.
#[derive(Debug, Clone, PartialEq)]
pub struct MlpModel {
    pub net: Mlp,
    pub input: Normalizer,
    pub output: Normalizer,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub(crate) struct NormalizerPair {
    pub input: Normalizer,
    pub output: Normalizer,
}

impl MlpModel {
    pub fn new(net: Mlp, input: Normalizer, output: Normalizer) -> Result<Self, LearnError> {
        input.validate()?;
        output.validate()?;
        if input.dim() != net.n_inputs() || output.dim() != net.n_outputs() {
            return Err(LearnError::Shape(format!(
                "normalizer sizes ({}, {}) do not match network {:?}",
                input.dim(),
                output.dim(),
                net.sizes()
            )));
        }
        Ok(Self { net, input, output })
    }

    pub fn predict(&self, x: &[f64]) -> Vec<f64> {
        self.output.denormalize(&self.net.forward(&self.input.normalize(x)))
    }

    /// Prediction plus whether `x` lies within twice the training range.
    pub fn predict_checked(&self, x: &[f64]) -> (Vec<f64>, bool) {
        (self.predict(x), self.input.in_domain(x))
    }
}
