//! One-hidden-layer perceptron trained with full-batch backpropagation.
//!
//! For an input `x` (k values) the network computes
//!
//! ```text
//! hidden_j = f(sum_i w_ij x_i + b_j)
//! output_n = g(sum_j rho_jn hidden_j + delta_n)
//! ```
//!
//! and is trained on the batch mean of `0.5 * sum_n (target_n - output_n)^2`.

use std::io::Write;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::Matrix;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Activation {
    Linear,
    Tanh,
    Logistic,
}

impl Activation {
    #[inline]
    pub fn apply(self, z: f64) -> f64 {
        match self {
            Activation::Linear => z,
            Activation::Tanh => z.tanh(),
            Activation::Logistic => 1.0 / (1.0 + (-z).exp()),
        }
    }

    /// Derivative expressed through the activation's output `a = apply(z)`.
    #[inline]
    pub fn derivative_from_output(self, a: f64) -> f64 {
        match self {
            Activation::Linear => 1.0,
            Activation::Tanh => 1.0 - a * a,
            Activation::Logistic => a * (1.0 - a),
        }
    }
}

impl FromStr for Activation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "linear" => Ok(Activation::Linear),
            "tanh" => Ok(Activation::Tanh),
            "logistic" => Ok(Activation::Logistic),
            other => Err(Error::Usage(format!("unknown activation `{other}`"))),
        }
    }
}

/// Feed-forward network `[inputs, hidden, outputs]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MlpNetwork {
    pub layer_sizes: [usize; 3],
    /// `inputs x hidden`
    pub weights_input_hidden: Matrix,
    pub bias_hidden: Vec<f64>,
    /// `hidden x outputs`
    pub weights_hidden_output: Matrix,
    pub bias_output: Vec<f64>,
    pub activation_hidden: Activation,
    pub activation_output: Activation,
}

/// Hidden and output activations of one forward pass.
#[derive(Clone, Debug, PartialEq)]
pub struct Forward {
    pub hidden: Vec<f64>,
    pub output: Vec<f64>,
}

/// Gradient of the batch loss, shaped like the network parameters.
#[derive(Clone, Debug, PartialEq)]
pub struct Gradients {
    pub weights_input_hidden: Matrix,
    pub bias_hidden: Vec<f64>,
    pub weights_hidden_output: Matrix,
    pub bias_output: Vec<f64>,
}

impl Gradients {
    fn zeros_like(net: &MlpNetwork) -> Self {
        let [k, m, l] = net.layer_sizes;
        Self {
            weights_input_hidden: Matrix::zeros(k, m),
            bias_hidden: vec![0.0; m],
            weights_hidden_output: Matrix::zeros(m, l),
            bias_output: vec![0.0; l],
        }
    }

    /// Flattened in [`MlpNetwork::parameters`] order.
    pub fn to_vec(&self) -> Vec<f64> {
        let mut v = self.weights_input_hidden.as_slice().to_vec();
        v.extend(&self.bias_hidden);
        v.extend(self.weights_hidden_output.as_slice());
        v.extend(&self.bias_output);
        v
    }

    pub fn max_abs(&self) -> f64 {
        self.to_vec().iter().fold(0.0, |a, v| a.max(v.abs()))
    }
}

/// Tanh hidden layer, linear output.
pub fn init_network(layer_sizes: [usize; 3], seed: u64) -> Result<MlpNetwork> {
    init_network_with(layer_sizes, seed, Activation::Tanh, Activation::Linear)
}

/// Weights uniform in `±1/sqrt(fan_in)` from a ChaCha stream seeded by
/// `seed`; biases zero.
pub fn init_network_with(
    layer_sizes: [usize; 3],
    seed: u64,
    activation_hidden: Activation,
    activation_output: Activation,
) -> Result<MlpNetwork> {
    let [k, m, l] = layer_sizes;
    if k == 0 || m == 0 || l == 0 {
        return Err(Error::Usage(format!(
            "layer sizes must all be at least 1, got {layer_sizes:?}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let a = 1.0 / (k as f64).sqrt();
    let weights_input_hidden = Matrix::from_fn(k, m, |_, _| rng.random_range(-a..=a));
    let b = 1.0 / (m as f64).sqrt();
    let weights_hidden_output = Matrix::from_fn(m, l, |_, _| rng.random_range(-b..=b));
    Ok(MlpNetwork {
        layer_sizes,
        weights_input_hidden,
        bias_hidden: vec![0.0; m],
        weights_hidden_output,
        bias_output: vec![0.0; l],
        activation_hidden,
        activation_output,
    })
}

impl MlpNetwork {
    pub fn n_inputs(&self) -> usize {
        self.layer_sizes[0]
    }

    pub fn n_hidden(&self) -> usize {
        self.layer_sizes[1]
    }

    pub fn n_outputs(&self) -> usize {
        self.layer_sizes[2]
    }

    /// Checks shapes against `layer_sizes` and that every parameter is finite.
    pub fn validate(&self) -> Result<()> {
        let [k, m, l] = self.layer_sizes;
        let shapes_ok = self.weights_input_hidden.rows() == k
            && self.weights_input_hidden.cols() == m
            && self.bias_hidden.len() == m
            && self.weights_hidden_output.rows() == m
            && self.weights_hidden_output.cols() == l
            && self.bias_output.len() == l;
        if !shapes_ok || k == 0 || m == 0 || l == 0 {
            return Err(Error::Shape(format!(
                "network parameters do not match layer sizes {:?}",
                self.layer_sizes
            )));
        }
        if self.parameters().iter().any(|v| !v.is_finite()) {
            return Err(Error::Numeric("network has non-finite parameters".into()));
        }
        Ok(())
    }

    pub fn forward(&self, x: &[f64]) -> Result<Forward> {
        if x.len() != self.n_inputs() {
            return Err(Error::Shape(format!(
                "input has {} values, network expects {}",
                x.len(),
                self.n_inputs()
            )));
        }
        Ok(self.forward_unchecked(x))
    }

    fn forward_unchecked(&self, x: &[f64]) -> Forward {
        let hidden: Vec<f64> = (0..self.n_hidden())
            .map(|j| {
                let z = x
                    .iter()
                    .enumerate()
                    .fold(self.bias_hidden[j], |acc, (i, xi)| {
                        acc + self.weights_input_hidden[(i, j)] * xi
                    });
                self.activation_hidden.apply(z)
            })
            .collect();
        let output = (0..self.n_outputs())
            .map(|n| {
                let z = hidden
                    .iter()
                    .enumerate()
                    .fold(self.bias_output[n], |acc, (j, t)| {
                        acc + self.weights_hidden_output[(j, n)] * t
                    });
                self.activation_output.apply(z)
            })
            .collect();
        Forward { hidden, output }
    }

    pub fn predict(&self, x: &[f64]) -> Result<Vec<f64>> {
        Ok(self.forward(x)?.output)
    }

    pub fn parameter_count(&self) -> usize {
        let [k, m, l] = self.layer_sizes;
        k * m + m + m * l + l
    }

    /// All parameters flattened: input-hidden weights (row-major), hidden
    /// biases, hidden-output weights (row-major), output biases.
    pub fn parameters(&self) -> Vec<f64> {
        let mut v = self.weights_input_hidden.as_slice().to_vec();
        v.extend(&self.bias_hidden);
        v.extend(self.weights_hidden_output.as_slice());
        v.extend(&self.bias_output);
        v
    }

    pub fn parameter_mut(&mut self, index: usize) -> &mut f64 {
        let mut i = index;
        let wih = self.weights_input_hidden.as_mut_slice();
        if i < wih.len() {
            return &mut wih[i];
        }
        i -= wih.len();
        if i < self.bias_hidden.len() {
            return &mut self.bias_hidden[i];
        }
        i -= self.bias_hidden.len();
        let who = self.weights_hidden_output.as_mut_slice();
        if i < who.len() {
            return &mut who[i];
        }
        i -= who.len();
        &mut self.bias_output[i]
    }

    fn step(&mut self, grads: &Gradients, learning_rate: f64) {
        let update = |p: &mut [f64], g: &[f64]| {
            p.iter_mut()
                .zip(g)
                .for_each(|(p, g)| *p -= learning_rate * g);
        };
        update(
            self.weights_input_hidden.as_mut_slice(),
            grads.weights_input_hidden.as_slice(),
        );
        update(&mut self.bias_hidden, &grads.bias_hidden);
        update(
            self.weights_hidden_output.as_mut_slice(),
            grads.weights_hidden_output.as_slice(),
        );
        update(&mut self.bias_output, &grads.bias_output);
    }
}

fn check_batch(net: &MlpNetwork, inputs: &[Vec<f64>], targets: &[Vec<f64>]) -> Result<()> {
    if inputs.is_empty() {
        return Err(Error::Usage("empty batch".into()));
    }
    if inputs.len() != targets.len() {
        return Err(Error::Shape(format!(
            "{} inputs but {} targets",
            inputs.len(),
            targets.len()
        )));
    }
    for (s, (x, t)) in inputs.iter().zip(targets).enumerate() {
        if x.len() != net.n_inputs() || t.len() != net.n_outputs() {
            return Err(Error::Shape(format!(
                "sample {s} has {} inputs and {} targets, network is {:?}",
                x.len(),
                t.len(),
                net.layer_sizes
            )));
        }
    }
    Ok(())
}

/// Batch mean of `0.5 * sum_n (target_n - output_n)^2`.
pub fn loss(net: &MlpNetwork, inputs: &[Vec<f64>], targets: &[Vec<f64>]) -> Result<f64> {
    check_batch(net, inputs, targets)?;
    let total: f64 = inputs
        .iter()
        .zip(targets)
        .map(|(x, t)| {
            let out = net.forward_unchecked(x).output;
            0.5 * t
                .iter()
                .zip(&out)
                .map(|(e, o)| (e - o) * (e - o))
                .sum::<f64>()
        })
        .sum();
    Ok(total / inputs.len() as f64)
}

/// Analytic gradient of [`loss`] by backpropagation. Returns the loss too.
pub fn gradients(
    net: &MlpNetwork,
    inputs: &[Vec<f64>],
    targets: &[Vec<f64>],
) -> Result<(f64, Gradients)> {
    check_batch(net, inputs, targets)?;
    let [k, m, l] = net.layer_sizes;
    let mut g = Gradients::zeros_like(net);
    let mut total = 0.0;
    let mut delta_out = vec![0.0; l];
    let mut delta_hidden = vec![0.0; m];

    for (x, t) in inputs.iter().zip(targets) {
        let Forward { hidden, output } = net.forward_unchecked(x);
        total += 0.5
            * t.iter()
                .zip(&output)
                .map(|(e, o)| (e - o) * (e - o))
                .sum::<f64>();
        for n in 0..l {
            let err = output[n] - t[n];
            delta_out[n] = err * net.activation_output.derivative_from_output(output[n]);
        }
        for j in 0..m {
            let back: f64 = (0..l)
                .map(|n| net.weights_hidden_output[(j, n)] * delta_out[n])
                .sum();
            delta_hidden[j] = back * net.activation_hidden.derivative_from_output(hidden[j]);
        }
        for j in 0..m {
            for n in 0..l {
                g.weights_hidden_output[(j, n)] += hidden[j] * delta_out[n];
            }
        }
        for n in 0..l {
            g.bias_output[n] += delta_out[n];
        }
        for i in 0..k {
            for j in 0..m {
                g.weights_input_hidden[(i, j)] += x[i] * delta_hidden[j];
            }
        }
        for j in 0..m {
            g.bias_hidden[j] += delta_hidden[j];
        }
    }

    let scale = 1.0 / inputs.len() as f64;
    g.weights_input_hidden
        .as_mut_slice()
        .iter_mut()
        .for_each(|v| *v *= scale);
    g.bias_hidden.iter_mut().for_each(|v| *v *= scale);
    g.weights_hidden_output
        .as_mut_slice()
        .iter_mut()
        .for_each(|v| *v *= scale);
    g.bias_output.iter_mut().for_each(|v| *v *= scale);
    Ok((total / inputs.len() as f64, g))
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BatchMode {
    #[default]
    FullBatch,
}

/// Gradient-descent settings plus the network shape used by the pipeline.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub max_epochs: usize,
    /// Stop once an epoch's training loss is at or below this.
    pub mse_stop: f64,
    pub seed: u64,
    pub batch_mode: BatchMode,
    pub hidden_width: usize,
    pub activation_hidden: Activation,
    pub activation_output: Activation,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            learning_rate: 0.01,
            max_epochs: 50,
            mse_stop: 0.0,
            seed: 0,
            batch_mode: BatchMode::FullBatch,
            hidden_width: 10,
            activation_hidden: Activation::Tanh,
            activation_output: Activation::Linear,
        }
    }
}

impl TrainConfig {
    /// A learning rate of zero and zero epochs are accepted and leave the
    /// network untouched.
    pub fn validate(&self) -> Result<()> {
        if !(self.learning_rate.is_finite() && self.learning_rate >= 0.0) {
            return Err(Error::Usage(format!(
                "learning_rate must be finite and non-negative, got {}",
                self.learning_rate
            )));
        }
        if !(self.mse_stop >= 0.0) {
            return Err(Error::Usage(format!(
                "mse_stop must be non-negative, got {}",
                self.mse_stop
            )));
        }
        if self.hidden_width == 0 {
            return Err(Error::Usage("hidden_width must be at least 1".into()));
        }
        Ok(())
    }
}

/// Per-epoch losses, measured after that epoch's update.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct TrainHistory {
    pub train_loss: Vec<f64>,
    /// Empty when no validation set was supplied.
    pub val_loss: Vec<f64>,
}

impl TrainHistory {
    pub fn epochs(&self) -> usize {
        self.train_loss.len()
    }
}

pub const LOSS_CSV_HEADER: &str = "epoch,train_loss,val_loss";

/// Epochs count from 1; the validation cell is empty when absent.
pub fn write_loss_csv<W: Write>(history: &TrainHistory, mut out: W) -> Result<()> {
    writeln!(out, "{LOSS_CSV_HEADER}")?;
    for (e, t) in history.train_loss.iter().enumerate() {
        match history.val_loss.get(e) {
            Some(v) => writeln!(out, "{},{t},{v}", e + 1)?,
            None => writeln!(out, "{},{t},", e + 1)?,
        }
    }
    Ok(())
}

/// Labelled samples for training.
#[derive(Clone, Copy, Debug)]
pub struct Batch<'a> {
    pub inputs: &'a [Vec<f64>],
    pub targets: &'a [Vec<f64>],
}

/// Full-batch gradient descent `p <- p - lr * dloss/dp`.
///
/// Runs until an epoch's training loss is at or below `mse_stop` or
/// `max_epochs` epochs have run.
pub fn train(
    net: &MlpNetwork,
    train_set: Batch<'_>,
    val_set: Option<Batch<'_>>,
    config: &TrainConfig,
) -> Result<(MlpNetwork, TrainHistory)> {
    config.validate()?;
    net.validate()?;
    check_batch(net, train_set.inputs, train_set.targets)?;
    if let Some(val) = val_set {
        check_batch(net, val.inputs, val.targets)?;
    }
    let mut net = net.clone();
    let mut history = TrainHistory::default();
    for epoch in 1..=config.max_epochs {
        let (_, grads) = gradients(&net, train_set.inputs, train_set.targets)?;
        net.step(&grads, config.learning_rate);
        let train_loss = loss(&net, train_set.inputs, train_set.targets)?;
        if !train_loss.is_finite() {
            return Err(Error::Divergence { epoch });
        }
        history.train_loss.push(train_loss);
        if let Some(val) = val_set {
            history.val_loss.push(loss(&net, val.inputs, val.targets)?);
        }
        if train_loss <= config.mse_stop {
            break;
        }
    }
    Ok((net, history))
}
