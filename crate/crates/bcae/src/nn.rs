//! Minimal dense-network engine: forward pass with an activation tape,
//! exact reverse-mode gradients, and cross-entropy loss.
//!
//! The engine supports exactly what the broadcast autoencoder needs: stacks
//! of dense layers with ReLU, linear, or softmax activations, batched over
//! columns. Gradients are exact reverse-mode derivatives, never approximated;
//! `grad_check` compares them against central finite differences and is the
//! standing diagnostic for the whole crate.

use rand::Rng;
use rand_distr::{Distribution, Normal};

use crate::batch::Batch;
use crate::error::{Error, Result};

/// Probabilities are clamped to this floor before any `ln`, so an early
/// confidently-wrong decoder costs a large but finite loss.
pub const PROB_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Activation {
    Relu,
    Linear,
    Softmax,
}

impl Activation {
    pub fn name(self) -> &'static str {
        match self {
            Activation::Relu => "relu",
            Activation::Linear => "linear",
            Activation::Softmax => "softmax",
        }
    }

    pub fn from_name(name: &str) -> Result<Self> {
        match name {
            "relu" => Ok(Activation::Relu),
            "linear" => Ok(Activation::Linear),
            "softmax" => Ok(Activation::Softmax),
            other => Err(Error::Checkpoint(format!("unknown activation `{other}`"))),
        }
    }
}

/// One dense layer: `out = activation(W x + b)` with `W` stored row-major
/// with shape `(out_dim, in_dim)`.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseLayer {
    in_dim: usize,
    out_dim: usize,
    weights: Vec<f64>,
    bias: Vec<f64>,
    activation: Activation,
}

impl DenseLayer {
    /// All-zero layer; mostly useful as a deserialization target.
    pub fn zeros(in_dim: usize, out_dim: usize, activation: Activation) -> Self {
        assert!(in_dim >= 1 && out_dim >= 1, "layer dims must be >= 1");
        DenseLayer {
            in_dim,
            out_dim,
            weights: vec![0.0; in_dim * out_dim],
            bias: vec![0.0; out_dim],
            activation,
        }
    }

    /// Seeded Gaussian initialization: He scaling (std `sqrt(2/in_dim)`) for
    /// ReLU layers, Xavier scaling (std `sqrt(1/in_dim)`) otherwise. Biases
    /// start at zero.
    pub fn init<R: Rng + ?Sized>(
        in_dim: usize,
        out_dim: usize,
        activation: Activation,
        rng: &mut R,
    ) -> Self {
        let std = match activation {
            Activation::Relu => (2.0 / in_dim as f64).sqrt(),
            Activation::Linear | Activation::Softmax => (1.0 / in_dim as f64).sqrt(),
        };
        let dist = Normal::new(0.0, std).expect("finite std");
        let mut layer = DenseLayer::zeros(in_dim, out_dim, activation);
        for w in &mut layer.weights {
            *w = dist.sample(rng);
        }
        layer
    }

    pub fn from_params(
        in_dim: usize,
        out_dim: usize,
        activation: Activation,
        weights: Vec<f64>,
        bias: Vec<f64>,
    ) -> Result<Self> {
        if weights.len() != in_dim * out_dim || bias.len() != out_dim {
            return Err(Error::Config(format!(
                "parameter shapes do not match a {out_dim} x {in_dim} dense layer"
            )));
        }
        if !weights.iter().chain(bias.iter()).all(|v| v.is_finite()) {
            return Err(Error::Config("layer parameters must be finite".into()));
        }
        Ok(DenseLayer {
            in_dim,
            out_dim,
            weights,
            bias,
            activation,
        })
    }

    #[inline]
    pub fn in_dim(&self) -> usize {
        self.in_dim
    }

    #[inline]
    pub fn out_dim(&self) -> usize {
        self.out_dim
    }

    #[inline]
    pub fn activation(&self) -> Activation {
        self.activation
    }

    #[inline]
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    #[inline]
    pub fn bias(&self) -> &[f64] {
        &self.bias
    }

    /// Mutable parameter access for optimizers and finite-difference probes.
    /// Callers must keep every entry finite.
    #[inline]
    pub fn weights_mut(&mut self) -> &mut [f64] {
        &mut self.weights
    }

    #[inline]
    pub fn bias_mut(&mut self) -> &mut [f64] {
        &mut self.bias
    }

    pub fn param_count(&self) -> usize {
        self.weights.len() + self.bias.len()
    }

    /// Flat parameter view: weights first (row-major), then biases.
    #[inline]
    pub fn param(&self, idx: usize) -> f64 {
        if idx < self.weights.len() {
            self.weights[idx]
        } else {
            self.bias[idx - self.weights.len()]
        }
    }

    #[inline]
    pub fn set_param(&mut self, idx: usize, value: f64) {
        if idx < self.weights.len() {
            self.weights[idx] = value;
        } else {
            let n = self.weights.len();
            self.bias[idx - n] = value;
        }
    }

    /// Affine part `z = W x + b`, batched over columns.
    fn affine(&self, input: &Batch) -> Batch {
        let cols = input.len();
        let mut out = Batch::zeros(self.out_dim, cols);
        for o in 0..self.out_dim {
            let b = self.bias[o];
            let w_row = &self.weights[o * self.in_dim..(o + 1) * self.in_dim];
            let out_row = out.row_mut(o);
            out_row.fill(b);
            for (i, &w) in w_row.iter().enumerate() {
                let in_row = input.row(i);
                for (acc, &x) in out_row.iter_mut().zip(in_row) {
                    *acc = w.mul_add(x, *acc);
                }
            }
        }
        out
    }

    fn apply_activation(&self, z: &mut Batch) {
        match self.activation {
            Activation::Linear => {}
            Activation::Relu => {
                for v in z.data_mut() {
                    if *v < 0.0 {
                        *v = 0.0;
                    }
                }
            }
            Activation::Softmax => softmax_columns(z),
        }
    }
}

/// Numerically stabilized column-wise softmax (max subtraction before exp).
fn softmax_columns(z: &mut Batch) {
    let dim = z.dim();
    let cols = z.len();
    for c in 0..cols {
        let mut max = f64::NEG_INFINITY;
        for r in 0..dim {
            max = max.max(z.get(r, c));
        }
        let mut sum = 0.0;
        for r in 0..dim {
            let e = (z.get(r, c) - max).exp();
            z.set(r, c, e);
            sum += e;
        }
        for r in 0..dim {
            z.set(r, c, z.get(r, c) / sum);
        }
    }
}

/// A stack of dense layers with consistent inner dimensions.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseNet {
    input_dim: usize,
    layers: Vec<DenseLayer>,
}

impl DenseNet {
    /// Seeded construction from `(out_dim, activation)` layer specs.
    pub fn init<R: Rng + ?Sized>(
        input_dim: usize,
        layer_specs: &[(usize, Activation)],
        rng: &mut R,
    ) -> Self {
        assert!(input_dim >= 1, "input dim must be >= 1");
        assert!(!layer_specs.is_empty(), "a net needs at least one layer");
        let mut layers = Vec::with_capacity(layer_specs.len());
        let mut in_dim = input_dim;
        for &(out_dim, act) in layer_specs {
            layers.push(DenseLayer::init(in_dim, out_dim, act, rng));
            in_dim = out_dim;
        }
        DenseNet { input_dim, layers }
    }

    pub fn from_layers(input_dim: usize, layers: Vec<DenseLayer>) -> Result<Self> {
        if layers.is_empty() {
            return Err(Error::Config("a net needs at least one layer".into()));
        }
        let mut in_dim = input_dim;
        for (i, layer) in layers.iter().enumerate() {
            if layer.in_dim != in_dim {
                return Err(Error::Config(format!(
                    "layer {i} expects input dim {}, previous layer provides {in_dim}",
                    layer.in_dim
                )));
            }
            in_dim = layer.out_dim;
        }
        Ok(DenseNet { input_dim, layers })
    }

    #[inline]
    pub fn input_dim(&self) -> usize {
        self.input_dim
    }

    pub fn output_dim(&self) -> usize {
        self.layers.last().expect("non-empty").out_dim
    }

    #[inline]
    pub fn layers(&self) -> &[DenseLayer] {
        &self.layers
    }

    #[inline]
    pub fn layers_mut(&mut self) -> &mut [DenseLayer] {
        &mut self.layers
    }

    pub fn param_count(&self) -> usize {
        self.layers.iter().map(DenseLayer::param_count).sum()
    }

    /// Forward pass recording the activation tape needed by `backward`.
    pub fn forward(&self, input: &Batch) -> Result<(Batch, Tape)> {
        if input.dim() != self.input_dim {
            return Err(Error::Config(format!(
                "input dim {} does not match net input dim {}",
                input.dim(),
                self.input_dim
            )));
        }
        let mut inputs = Vec::with_capacity(self.layers.len());
        let mut outputs = Vec::with_capacity(self.layers.len());
        let mut current = input.clone();
        for layer in &self.layers {
            let mut z = layer.affine(&current);
            layer.apply_activation(&mut z);
            inputs.push(current);
            outputs.push(z.clone());
            current = z;
        }
        let tape = Tape {
            inputs,
            outputs,
            batch_len: input.len(),
        };
        Ok((current, tape))
    }

    /// Forward pass without a tape, for inference.
    pub fn output(&self, input: &Batch) -> Result<Batch> {
        Ok(self.forward(input)?.0)
    }

    /// Exact reverse-mode pass. `upstream` is the gradient of a scalar loss
    /// with respect to the net output (post-activation). Returns per-layer
    /// parameter gradients and the gradient with respect to the net input.
    ///
    /// For softmax layers the full Jacobian is applied, so composing with
    /// [`cross_entropy_grad`] reproduces the standard `(probs - one_hot)`
    /// logit gradient.
    pub fn backward(&self, tape: &Tape, upstream: &Batch) -> Result<(NetGrads, Batch)> {
        if tape.inputs.len() != self.layers.len() {
            return Err(Error::Input(
                "stale tape: layer count does not match this net".into(),
            ));
        }
        if upstream.dim() != self.output_dim() || upstream.len() != tape.batch_len {
            return Err(Error::Input(
                "upstream gradient shape does not match the taped forward pass".into(),
            ));
        }
        for (i, layer) in self.layers.iter().enumerate() {
            if tape.inputs[i].dim() != layer.in_dim || tape.outputs[i].dim() != layer.out_dim {
                return Err(Error::Input(format!(
                    "stale tape: layer {i} dims do not match this net"
                )));
            }
        }

        let mut grads: Vec<LayerGrads> = Vec::with_capacity(self.layers.len());
        let mut g = upstream.clone();
        for (layer, (input, output)) in self
            .layers
            .iter()
            .zip(tape.inputs.iter().zip(tape.outputs.iter()))
            .rev()
        {
            let dz = activation_backward(layer.activation, output, &g);
            let cols = dz.len();

            // dW[o][i] = sum_b dz[o][b] * input[i][b]
            let mut d_weights = vec![0.0; layer.weights.len()];
            let mut d_bias = vec![0.0; layer.out_dim];
            for o in 0..layer.out_dim {
                let dz_row = dz.row(o);
                d_bias[o] = dz_row.iter().sum();
                let w_grad_row = &mut d_weights[o * layer.in_dim..(o + 1) * layer.in_dim];
                for (i, wg) in w_grad_row.iter_mut().enumerate() {
                    let in_row = input.row(i);
                    let mut acc = 0.0;
                    for (&d, &x) in dz_row.iter().zip(in_row) {
                        acc = d.mul_add(x, acc);
                    }
                    *wg = acc;
                }
            }

            // dInput[i][b] = sum_o W[o][i] * dz[o][b]
            let mut d_input = Batch::zeros(layer.in_dim, cols);
            for o in 0..layer.out_dim {
                let dz_row = dz.row(o);
                let w_row = &layer.weights[o * layer.in_dim..(o + 1) * layer.in_dim];
                for (i, &w) in w_row.iter().enumerate() {
                    let d_in_row = d_input.row_mut(i);
                    for (acc, &d) in d_in_row.iter_mut().zip(dz_row) {
                        *acc = w.mul_add(d, *acc);
                    }
                }
            }

            grads.push(LayerGrads {
                weights: d_weights,
                bias: d_bias,
            });
            g = d_input;
        }
        grads.reverse();
        Ok((NetGrads { layers: grads }, g))
    }
}

/// Gradient of the activation output with respect to its pre-activation,
/// chained with the upstream gradient.
fn activation_backward(activation: Activation, output: &Batch, upstream: &Batch) -> Batch {
    match activation {
        Activation::Linear => upstream.clone(),
        Activation::Relu => {
            let mut dz = upstream.clone();
            for (d, &o) in dz.data_mut().iter_mut().zip(output.data()) {
                if o <= 0.0 {
                    *d = 0.0;
                }
            }
            dz
        }
        Activation::Softmax => {
            // dz_i = p_i * (g_i - sum_j g_j p_j), per column.
            let dim = output.dim();
            let cols = output.len();
            let mut dz = Batch::zeros(dim, cols);
            for c in 0..cols {
                let mut dot = 0.0;
                for r in 0..dim {
                    dot += upstream.get(r, c) * output.get(r, c);
                }
                for r in 0..dim {
                    let p = output.get(r, c);
                    dz.set(r, c, p * (upstream.get(r, c) - dot));
                }
            }
            dz
        }
    }
}

/// Activation record from one forward pass; consumed by `backward`.
#[derive(Debug, Clone)]
pub struct Tape {
    inputs: Vec<Batch>,
    outputs: Vec<Batch>,
    batch_len: usize,
}

impl Tape {
    pub fn batch_len(&self) -> usize {
        self.batch_len
    }
}

/// Parameter gradients for one layer, shaped like the layer itself.
#[derive(Debug, Clone)]
pub struct LayerGrads {
    pub weights: Vec<f64>,
    pub bias: Vec<f64>,
}

impl LayerGrads {
    /// Flat indexing matching [`DenseLayer::param`].
    #[inline]
    pub fn param(&self, idx: usize) -> f64 {
        if idx < self.weights.len() {
            self.weights[idx]
        } else {
            self.bias[idx - self.weights.len()]
        }
    }
}

/// Parameter gradients for a whole net, one entry per layer.
#[derive(Debug, Clone)]
pub struct NetGrads {
    pub layers: Vec<LayerGrads>,
}

impl NetGrads {
    pub fn all_finite(&self) -> bool {
        self.layers
            .iter()
            .all(|l| l.weights.iter().chain(l.bias.iter()).all(|v| v.is_finite()))
    }

    /// Element-wise sum; shapes must match.
    pub fn add(&self, other: &NetGrads) -> NetGrads {
        assert_eq!(self.layers.len(), other.layers.len());
        let layers = self
            .layers
            .iter()
            .zip(&other.layers)
            .map(|(a, b)| LayerGrads {
                weights: a.weights.iter().zip(&b.weights).map(|(x, y)| x + y).collect(),
                bias: a.bias.iter().zip(&b.bias).map(|(x, y)| x + y).collect(),
            })
            .collect();
        NetGrads { layers }
    }
}

/// Mean negative log-probability of the true labels over the batch.
/// Probabilities are clamped to [`PROB_FLOOR`] before the log.
pub fn cross_entropy(probs: &Batch, labels: &[usize]) -> Result<f64> {
    check_prob_batch(probs, labels)?;
    let mut total = 0.0;
    for (c, &label) in labels.iter().enumerate() {
        let p = probs.get(label, c).max(PROB_FLOOR);
        total -= p.ln();
    }
    Ok(total / labels.len() as f64)
}

/// Gradient of [`cross_entropy`] with respect to the probabilities:
/// `-1 / (B * p)` at the true label (zero where the floor clamps), zero
/// elsewhere.
pub fn cross_entropy_grad(probs: &Batch, labels: &[usize]) -> Result<Batch> {
    check_prob_batch(probs, labels)?;
    let batch = labels.len() as f64;
    let mut grad = Batch::zeros(probs.dim(), probs.len());
    for (c, &label) in labels.iter().enumerate() {
        let p = probs.get(label, c);
        if p > PROB_FLOOR {
            grad.set(label, c, -1.0 / (batch * p));
        }
    }
    Ok(grad)
}

fn check_prob_batch(probs: &Batch, labels: &[usize]) -> Result<()> {
    if labels.len() != probs.len() {
        return Err(Error::Input(format!(
            "label count {} does not match batch size {}",
            labels.len(),
            probs.len()
        )));
    }
    for (c, &label) in labels.iter().enumerate() {
        if label >= probs.dim() {
            return Err(Error::Input(format!(
                "label {label} at column {c} is out of range for {} classes",
                probs.dim()
            )));
        }
    }
    debug_assert!(
        (0..probs.len()).all(|c| {
            let s: f64 = (0..probs.dim()).map(|r| probs.get(r, c)).sum();
            (s - 1.0).abs() < 1e-6
        }),
        "probability columns must sum to 1"
    );
    Ok(())
}

/// Maximum relative disagreement between analytic gradients and central
/// finite differences over every parameter of `net`.
///
/// The probed scalar loss is the cross-entropy of the net output when the
/// head is softmax, and the batch mean of the summed outputs otherwise
/// (`labels` is ignored in that case). The relative error for one parameter
/// is `|analytic - numeric| / max(|analytic|, |numeric|, 1e-12)`.
pub fn grad_check(net: &mut DenseNet, input: &Batch, labels: &[usize], eps: f64) -> Result<f64> {
    if !(eps > 0.0 && eps <= 1e-2) {
        return Err(Error::Input(format!("eps must be in (0, 1e-2], got {eps}")));
    }
    let softmax_head = net.layers().last().unwrap().activation() == Activation::Softmax;
    let loss_of = |net: &DenseNet| -> Result<f64> {
        let out = net.output(input)?;
        if softmax_head {
            cross_entropy(&out, labels)
        } else {
            Ok(out.data().iter().sum::<f64>() / out.len() as f64)
        }
    };

    let (out, tape) = net.forward(input)?;
    let upstream = if softmax_head {
        cross_entropy_grad(&out, labels)?
    } else {
        let b = out.len() as f64;
        Batch::from_fn(out.dim(), out.len(), |_, _| 1.0 / b)
    };
    let (grads, _) = net.backward(&tape, &upstream)?;

    let mut max_rel = 0.0f64;
    for l in 0..net.layers().len() {
        for idx in 0..net.layers()[l].param_count() {
            let analytic = grads.layers[l].param(idx);
            let original = net.layers()[l].param(idx);

            net.layers_mut()[l].set_param(idx, original + eps);
            let plus = loss_of(net)?;
            net.layers_mut()[l].set_param(idx, original - eps);
            let minus = loss_of(net)?;
            net.layers_mut()[l].set_param(idx, original);

            let numeric = (plus - minus) / (2.0 * eps);
            let rel = (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(1e-12);
            max_rel = max_rel.max(rel);
        }
    }
    Ok(max_rel)
}
