//! Feed-forward multi-label classifier.
//!
//! Hidden layers use ReLU, the output layer has one sigmoid unit per label.
//! Training minimizes masked binary cross-entropy against soft targets with
//! Adam. Layers can be frozen; frozen layers still get gradients from
//! [`Mlp::backward`] but [`adam_step`] leaves their parameters and moments
//! alone.

use std::path::Path;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{self, stream};

/// Probabilities are clamped to `[PROB_CLAMP, 1 - PROB_CLAMP]` inside the loss.
pub const PROB_CLAMP: f64 = 1e-7;

const CHECKPOINT_FORMAT: &str = "hierlabel-mlp";
const CHECKPOINT_VERSION: u32 = 1;

/// Fully connected layer; `weights` is `outputs x inputs`, row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dense {
    pub inputs: usize,
    pub outputs: usize,
    pub weights: Vec<f64>,
    pub biases: Vec<f64>,
    #[serde(default)]
    pub frozen: bool,
}

impl Dense {
    pub fn zeros(inputs: usize, outputs: usize) -> Self {
        Dense {
            inputs,
            outputs,
            weights: vec![0.0; inputs * outputs],
            biases: vec![0.0; outputs],
            frozen: false,
        }
    }

    fn affine(&self, x: &[f64], out: &mut Vec<f64>) {
        out.clear();
        out.extend(self.weights.chunks_exact(self.inputs.max(1)).zip(&self.biases).map(
            |(w, b)| {
                if self.inputs == 0 {
                    *b
                } else {
                    w.iter().zip(x).map(|(w, x)| w * x).sum::<f64>() + b
                }
            },
        ));
    }

    fn params(&self) -> impl Iterator<Item = &f64> {
        self.weights.iter().chain(&self.biases)
    }
}

fn sigmoid(z: f64) -> f64 {
    let p = if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    };
    // keep outputs strictly inside (0, 1) even when exp saturates
    p.clamp(f64::MIN_POSITIVE, 1.0 - f64::EPSILON / 2.0)
}

/// Gradient (or moment) buffers shaped like an [`Mlp`]'s parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LayerBuffers {
    pub weights: Vec<f64>,
    pub biases: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Gradients {
    pub layers: Vec<LayerBuffers>,
}

impl Gradients {
    pub fn zeros_like(model: &Mlp) -> Self {
        Gradients {
            layers: model
                .layers
                .iter()
                .map(|l| LayerBuffers {
                    weights: vec![0.0; l.weights.len()],
                    biases: vec![0.0; l.biases.len()],
                })
                .collect(),
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = &f64> {
        self.layers
            .iter()
            .flat_map(|l| l.weights.iter().chain(&l.biases))
    }

    fn matches(&self, model: &Mlp) -> bool {
        self.layers.len() == model.layers.len()
            && self
                .layers
                .iter()
                .zip(&model.layers)
                .all(|(g, l)| g.weights.len() == l.weights.len() && g.biases.len() == l.biases.len())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Mlp {
    layers: Vec<Dense>,
}

impl Mlp {
    /// `dims = [F, hidden.., K]`, initialized uniformly in
    /// `±1/sqrt(fan_in)` from `seed`.
    pub fn new(dims: &[usize], seed: u64) -> Result<Self> {
        let mut model = Self::zeros(dims)?;
        let mut rng = rng::chacha(seed, &[stream::INIT]);
        for layer in &mut model.layers {
            let bound = 1.0 / (layer.inputs.max(1) as f64).sqrt();
            for w in layer.weights.iter_mut().chain(layer.biases.iter_mut()) {
                *w = rng.random_range(-bound..bound);
            }
        }
        Ok(model)
    }

    pub fn zeros(dims: &[usize]) -> Result<Self> {
        if dims.len() < 2 {
            return Err(Error::Shape("a model needs an input and an output size".into()));
        }
        if dims[1..].contains(&0) {
            return Err(Error::Shape(format!("zero-width layer in {dims:?}")));
        }
        Ok(Mlp {
            layers: dims.windows(2).map(|w| Dense::zeros(w[0], w[1])).collect(),
        })
    }

    pub fn from_layers(layers: Vec<Dense>) -> Result<Self> {
        if layers.is_empty() {
            return Err(Error::Shape("a model needs at least one layer".into()));
        }
        for (i, l) in layers.iter().enumerate() {
            if l.weights.len() != l.inputs * l.outputs || l.biases.len() != l.outputs || l.outputs == 0 {
                return Err(Error::Shape(format!("layer {i} buffers do not match its size")));
            }
            if i > 0 && layers[i - 1].outputs != l.inputs {
                return Err(Error::Shape(format!(
                    "layer {i} expects {} inputs, previous layer gives {}",
                    l.inputs,
                    layers[i - 1].outputs
                )));
            }
            if l.params().any(|p| !p.is_finite()) {
                return Err(Error::NonFinite(format!("layer {i} parameters")));
            }
        }
        Ok(Mlp { layers })
    }

    pub fn layers(&self) -> &[Dense] {
        &self.layers
    }

    pub fn layers_mut(&mut self) -> &mut [Dense] {
        &mut self.layers
    }

    pub fn input_dim(&self) -> usize {
        self.layers[0].inputs
    }

    pub fn output_dim(&self) -> usize {
        self.layers.last().expect("non-empty").outputs
    }

    pub fn frozen(&self) -> Vec<bool> {
        self.layers.iter().map(|l| l.frozen).collect()
    }

    pub fn num_params(&self) -> usize {
        self.layers.iter().map(|l| l.weights.len() + l.biases.len()).sum()
    }

    fn check_input(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.input_dim() {
            return Err(Error::Shape(format!(
                "model takes {} features, got {}",
                self.input_dim(),
                x.len()
            )));
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("model input".into()));
        }
        Ok(())
    }

    /// Per-layer activations: `acts[0] = x`, `acts[i+1]` = output of layer
    /// `i` (ReLU for hidden layers, sigmoid for the last).
    fn trace(&self, x: &[f64]) -> Vec<Vec<f64>> {
        let mut acts = Vec::with_capacity(self.layers.len() + 1);
        acts.push(x.to_vec());
        let last = self.layers.len() - 1;
        for (i, layer) in self.layers.iter().enumerate() {
            let mut z = Vec::with_capacity(layer.outputs);
            layer.affine(&acts[i], &mut z);
            if i == last {
                z.iter_mut().for_each(|v| *v = sigmoid(*v));
            } else {
                z.iter_mut().for_each(|v| *v = v.max(0.0));
            }
            acts.push(z);
        }
        acts
    }

    /// Label probabilities, each strictly inside `(0, 1)`.
    pub fn forward(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check_input(x)?;
        Ok(self.trace(x).pop().expect("output layer"))
    }

    /// Gradient of [`masked_bce`] of this sample.
    pub fn backward(&self, x: &[f64], targets: &[f64], mask: &[bool]) -> Result<Gradients> {
        let mut grads = Gradients::zeros_like(self);
        let active = mask.iter().filter(|&&m| m).count();
        if active > 0 {
            self.accumulate(x, targets, mask, 1.0 / active as f64, &mut grads)?;
        } else {
            self.check_sample(x, targets, mask)?;
        }
        Ok(grads)
    }

    fn check_sample(&self, x: &[f64], targets: &[f64], mask: &[bool]) -> Result<()> {
        self.check_input(x)?;
        let k = self.output_dim();
        if targets.len() != k || mask.len() != k {
            return Err(Error::Shape(format!(
                "model has {k} outputs, got {} targets and {} mask entries",
                targets.len(),
                mask.len()
            )));
        }
        Ok(())
    }

    /// Adds `cell_weight * d/dθ Σ_{masked k} bce_k` into `grads` and returns
    /// the weighted loss contribution.
    ///
    /// The gradient is that of the unclamped cross-entropy, `(p - y)` at the
    /// output logits; it equals the gradient of the clamped loss wherever the
    /// clamp is inactive.
    pub(crate) fn accumulate(
        &self,
        x: &[f64],
        targets: &[f64],
        mask: &[bool],
        cell_weight: f64,
        grads: &mut Gradients,
    ) -> Result<f64> {
        self.check_sample(x, targets, mask)?;
        let acts = self.trace(x);
        let probs = acts.last().expect("output");

        let mut loss = 0.0;
        let mut delta: Vec<f64> = probs
            .iter()
            .zip(targets)
            .zip(mask)
            .map(|((&p, &y), &m)| {
                if m {
                    loss += bce_term(p, y);
                    cell_weight * (p - y)
                } else {
                    0.0
                }
            })
            .collect();

        for i in (0..self.layers.len()).rev() {
            let layer = &self.layers[i];
            let input = &acts[i];
            let g = &mut grads.layers[i];
            for (o, &d) in delta.iter().enumerate() {
                if d == 0.0 {
                    continue;
                }
                g.biases[o] += d;
                let row = &mut g.weights[o * layer.inputs..(o + 1) * layer.inputs];
                for (gw, &a) in row.iter_mut().zip(input) {
                    *gw += d * a;
                }
            }
            if i == 0 {
                break;
            }
            let mut next = vec![0.0; layer.inputs];
            for (o, &d) in delta.iter().enumerate() {
                if d == 0.0 {
                    continue;
                }
                let w = &layer.weights[o * layer.inputs..(o + 1) * layer.inputs];
                for (n, &w) in next.iter_mut().zip(w) {
                    *n += d * w;
                }
            }
            // ReLU derivative: 1 where the unit was active
            for (n, &a) in next.iter_mut().zip(input) {
                if a <= 0.0 {
                    *n = 0.0;
                }
            }
            delta = next;
        }
        Ok(cell_weight * loss)
    }

    pub fn save(&self, path: impl AsRef<Path>, state: Option<&AdamState>) -> Result<()> {
        let path = path.as_ref();
        let bytes = Checkpoint::encode(self, state)?;
        std::fs::write(path, bytes).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<(Mlp, Option<AdamState>)> {
        let path = path.as_ref();
        let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
        Checkpoint::decode(&bytes)
    }
}

fn bce_term(p: f64, y: f64) -> f64 {
    let p = p.clamp(PROB_CLAMP, 1.0 - PROB_CLAMP);
    -(y * p.ln() + (1.0 - y) * (1.0 - p).ln())
}

/// Mean binary cross-entropy over the masked-in labels; 0 for an empty mask.
pub fn masked_bce(probs: &[f64], targets: &[f64], mask: &[bool]) -> Result<f64> {
    if probs.len() != targets.len() || probs.len() != mask.len() {
        return Err(Error::Shape(format!(
            "{} probabilities, {} targets, {} mask entries",
            probs.len(),
            targets.len(),
            mask.len()
        )));
    }
    let (sum, count) = probs
        .iter()
        .zip(targets)
        .zip(mask)
        .filter(|(_, &m)| m)
        .fold((0.0, 0usize), |(s, c), ((&p, &y), _)| (s + bce_term(p, y), c + 1));
    Ok(if count == 0 { 0.0 } else { sum / count as f64 })
}

/// Marks every layer but the last as frozen.
pub fn freeze_all_but_last(mut model: Mlp) -> Mlp {
    let last = model.layers.len() - 1;
    for (i, l) in model.layers.iter_mut().enumerate() {
        l.frozen = i != last;
    }
    model
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct OptimizerConfig {
    pub beta1: f64,
    pub beta2: f64,
    pub lr0: f64,
    pub epsilon: f64,
    /// Learning-rate multiplier applied after each epoch.
    pub decay_factor: f64,
    pub batch_size: usize,
    /// Adam steps per training stage.
    pub iterations: usize,
    pub seed: u64,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        OptimizerConfig {
            beta1: 0.9,
            beta2: 0.999,
            lr0: 1e-4,
            epsilon: 1e-8,
            decay_factor: 0.1,
            batch_size: 32,
            iterations: 50_000,
            seed: 0,
        }
    }
}

impl OptimizerConfig {
    pub fn validate(&self) -> Result<()> {
        let unit = |name: &str, v: f64| {
            if (0.0..1.0).contains(&v) {
                Ok(())
            } else {
                Err(Error::Config(format!("{name} must be in [0, 1), got {v}")))
            }
        };
        unit("beta1", self.beta1)?;
        unit("beta2", self.beta2)?;
        if !(self.lr0 > 0.0 && self.lr0.is_finite()) {
            return Err(Error::Config(format!("lr0 must be > 0, got {}", self.lr0)));
        }
        if !(self.epsilon >= 0.0 && self.epsilon.is_finite()) {
            return Err(Error::Config(format!("epsilon must be >= 0, got {}", self.epsilon)));
        }
        if !(self.decay_factor > 0.0 && self.decay_factor.is_finite()) {
            return Err(Error::Config(format!(
                "decay_factor must be > 0, got {}",
                self.decay_factor
            )));
        }
        if self.batch_size == 0 {
            return Err(Error::Config("batch_size must be >= 1".into()));
        }
        Ok(())
    }
}

/// Step-decayed learning rate for a 0-based epoch.
pub fn lr_schedule(config: &OptimizerConfig, epoch: usize) -> f64 {
    config.lr0 * config.decay_factor.powi(epoch.min(i32::MAX as usize) as i32)
}

/// Adam first and second moments plus the step counter.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdamState {
    pub m: Gradients,
    pub v: Gradients,
    pub t: u64,
}

impl AdamState {
    pub fn new(model: &Mlp) -> Self {
        AdamState {
            m: Gradients::zeros_like(model),
            v: Gradients::zeros_like(model),
            t: 0,
        }
    }
}

/// One bias-corrected Adam update of every non-frozen layer.
pub fn adam_step(
    model: &mut Mlp,
    state: &mut AdamState,
    grads: &Gradients,
    config: &OptimizerConfig,
    lr: f64,
) -> Result<()> {
    if !grads.matches(model) || !state.m.matches(model) || !state.v.matches(model) {
        return Err(Error::Shape("gradient/optimizer buffers do not match the model".into()));
    }
    if !(lr > 0.0 && lr.is_finite()) {
        return Err(Error::Range(format!("learning rate must be > 0, got {lr}")));
    }
    if grads.iter().any(|g| !g.is_finite()) {
        return Err(Error::NonFinite("gradient".into()));
    }

    state.t += 1;
    let t = state.t.min(i32::MAX as u64) as i32;
    let (b1, b2) = (config.beta1, config.beta2);
    let c1 = 1.0 - b1.powi(t);
    let c2 = 1.0 - b2.powi(t);

    for (i, layer) in model.layers.iter_mut().enumerate() {
        if layer.frozen {
            continue;
        }
        let g = &grads.layers[i];
        let m = &mut state.m.layers[i];
        let v = &mut state.v.layers[i];
        let params = layer.weights.iter_mut().chain(layer.biases.iter_mut());
        let gs = g.weights.iter().chain(&g.biases);
        let ms = m.weights.iter_mut().chain(m.biases.iter_mut());
        let vs = v.weights.iter_mut().chain(v.biases.iter_mut());
        for (((p, &g), m), v) in params.zip(gs).zip(ms).zip(vs) {
            *m = b1 * *m + (1.0 - b1) * g;
            *v = b2 * *v + (1.0 - b2) * g * g;
            let m_hat = *m / c1;
            let v_hat = *v / c2;
            *p -= lr * m_hat / (v_hat.sqrt() + config.epsilon);
        }
    }
    Ok(())
}

/// On-disk model: JSON with a format tag and version.
///
/// ```text
/// {"format":"hierlabel-mlp","version":1,
///  "layers":[{"inputs":F,"outputs":H,"weights":[..],"biases":[..],"frozen":true}, ..],
///  "optimizer":{"m":{"layers":[..]},"v":{"layers":[..]},"t":N} | null}
/// ```
///
/// Floats are written in shortest round-trip form, so decode(encode(x)) is
/// bit-exact.
#[derive(Debug, Serialize, Deserialize)]
struct Checkpoint {
    format: String,
    version: u32,
    layers: Vec<Dense>,
    optimizer: Option<AdamState>,
}

impl Checkpoint {
    fn encode(model: &Mlp, state: Option<&AdamState>) -> Result<Vec<u8>> {
        let ck = Checkpoint {
            format: CHECKPOINT_FORMAT.into(),
            version: CHECKPOINT_VERSION,
            layers: model.layers.clone(),
            optimizer: state.cloned(),
        };
        let mut bytes =
            serde_json::to_vec(&ck).map_err(|e| Error::Checkpoint(e.to_string()))?;
        bytes.push(b'\n');
        Ok(bytes)
    }

    fn decode(bytes: &[u8]) -> Result<(Mlp, Option<AdamState>)> {
        let ck: Checkpoint =
            serde_json::from_slice(bytes).map_err(|e| Error::Checkpoint(e.to_string()))?;
        if ck.format != CHECKPOINT_FORMAT {
            return Err(Error::Checkpoint(format!("unknown format `{}`", ck.format)));
        }
        if ck.version != CHECKPOINT_VERSION {
            return Err(Error::Checkpoint(format!("unsupported version {}", ck.version)));
        }
        let model = Mlp::from_layers(ck.layers)?;
        if let Some(s) = &ck.optimizer {
            if !s.m.matches(&model) || !s.v.matches(&model) {
                return Err(Error::Checkpoint("optimizer state does not match layers".into()));
            }
        }
        Ok((model, ck.optimizer))
    }
}

/// Serializes a model (and optionally its optimizer state) to checkpoint bytes.
pub fn encode_checkpoint(model: &Mlp, state: Option<&AdamState>) -> Result<Vec<u8>> {
    Checkpoint::encode(model, state)
}

pub fn decode_checkpoint(bytes: &[u8]) -> Result<(Mlp, Option<AdamState>)> {
    Checkpoint::decode(bytes)
}
