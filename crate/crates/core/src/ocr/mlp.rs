//! Fully connected sigmoid network trained by backpropagation on squared
//! error.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::math;
use crate::{Error, Result};

/// Layer sizes `[input, hidden..., output]`; `weights[k]` is row-major
/// `layers[k+1] x layers[k]`, `biases[k]` has `layers[k+1]` entries.
/// `alphabet` names the output classes in order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Mlp {
    pub layers: Vec<usize>,
    pub weights: Vec<Vec<f64>>,
    pub biases: Vec<Vec<f64>>,
    #[serde(default)]
    pub alphabet: String,
}

/// Logistic function. The argument is limited to `+-36`, where the result
/// is within 3e-16 of its asymptote, so outputs never round to 0 or 1.
pub fn sigmoid(z: f64) -> f64 {
    1.0 / (1.0 + math::exp(-z.clamp(-36.0, 36.0)))
}

impl Mlp {
    /// All-zero network.
    pub fn zeros(layers: &[usize]) -> Result<Self> {
        if layers.len() < 2 || layers.contains(&0) {
            return Err(Error::InvalidParameter("need at least two non-empty layers".into()));
        }
        Ok(Self {
            layers: layers.to_vec(),
            weights: layers.windows(2).map(|w| vec![0.0; w[0] * w[1]]).collect(),
            biases: layers[1..].iter().map(|&n| vec![0.0; n]).collect(),
            alphabet: String::new(),
        })
    }

    /// Weights and biases uniform in `+-1/sqrt(fan_in)`.
    pub fn random(layers: &[usize], seed: u64) -> Result<Self> {
        let mut net = Self::zeros(layers)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for (k, &fan_in) in layers[..net.weights.len()].iter().enumerate() {
            let r = 1.0 / math::sqrt(fan_in as f64);
            for w in net.weights[k].iter_mut().chain(net.biases[k].iter_mut()) {
                *w = rng.random_range(-r..=r);
            }
        }
        Ok(net)
    }

    pub fn input_len(&self) -> usize {
        self.layers[0]
    }

    pub fn output_len(&self) -> usize {
        *self.layers.last().expect("validated layers")
    }

    pub fn validate(&self) -> Result<()> {
        let ok = self.layers.len() >= 2
            && self.weights.len() == self.layers.len() - 1
            && self.biases.len() == self.layers.len() - 1
            && self
                .layers
                .windows(2)
                .zip(&self.weights)
                .all(|(l, w)| w.len() == l[0] * l[1])
            && self.layers[1..].iter().zip(&self.biases).all(|(&n, b)| b.len() == n);
        if !ok {
            return Err(Error::shape("consistent layer dimensions", "mismatched weights"));
        }
        if self
            .weights
            .iter()
            .chain(&self.biases)
            .flatten()
            .any(|v| !v.is_finite())
        {
            return Err(Error::InvalidParameter("network parameters must be finite".into()));
        }
        if !self.alphabet.is_empty() && self.alphabet.chars().count() != self.output_len() {
            return Err(Error::shape(
                format!("{} classes", self.output_len()),
                format!("alphabet of {}", self.alphabet.chars().count()),
            ));
        }
        Ok(())
    }

    /// Activations of every layer, input included.
    fn activations(&self, x: &[f64]) -> Result<Vec<Vec<f64>>> {
        if x.len() != self.input_len() {
            return Err(Error::shape(format!("{}", self.input_len()), format!("{}", x.len())));
        }
        let mut acts = vec![x.to_vec()];
        for (k, (w, b)) in self.weights.iter().zip(&self.biases).enumerate() {
            let (n_in, n_out) = (self.layers[k], self.layers[k + 1]);
            let a = &acts[k];
            let next: Vec<f64> = (0..n_out)
                .map(|o| {
                    let row = &w[o * n_in..(o + 1) * n_in];
                    sigmoid(b[o] + row.iter().zip(a).map(|(w, x)| w * x).sum::<f64>())
                })
                .collect();
            acts.push(next);
        }
        Ok(acts)
    }
}

/// Output activations, each in `(0, 1)`.
pub fn mlp_forward(net: &Mlp, x: &[f64]) -> Result<Vec<f64>> {
    Ok(net.activations(x)?.pop().expect("output layer"))
}

/// Parameter gradients laid out like the network.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub weights: Vec<Vec<f64>>,
    pub biases: Vec<Vec<f64>>,
}

/// Loss `0.5 * |y - target|^2` and its gradient by backpropagation.
pub fn loss_and_gradients(net: &Mlp, x: &[f64], target: &[f64]) -> Result<(f64, Gradients)> {
    if target.len() != net.output_len() {
        return Err(Error::shape(
            format!("{}", net.output_len()),
            format!("{}", target.len()),
        ));
    }
    let acts = net.activations(x)?;
    let out = acts.last().expect("output layer");
    let loss = 0.5 * out.iter().zip(target).map(|(y, t)| (y - t) * (y - t)).sum::<f64>();
    let mut delta: Vec<f64> = out.iter().zip(target).map(|(y, t)| (y - t) * y * (1.0 - y)).collect();
    let n = net.weights.len();
    let mut gw = vec![Vec::new(); n];
    let mut gb = vec![Vec::new(); n];
    for k in (0..n).rev() {
        let (n_in, n_out) = (net.layers[k], net.layers[k + 1]);
        let a = &acts[k];
        let mut g = vec![0.0; n_in * n_out];
        for o in 0..n_out {
            for i in 0..n_in {
                g[o * n_in + i] = delta[o] * a[i];
            }
        }
        gw[k] = g;
        gb[k] = delta.clone();
        if k > 0 {
            let w = &net.weights[k];
            delta = (0..n_in)
                .map(|i| {
                    let back: f64 = (0..n_out).map(|o| w[o * n_in + i] * delta[o]).sum();
                    back * a[i] * (1.0 - a[i])
                })
                .collect();
        }
    }
    Ok((
        loss,
        Gradients {
            weights: gw,
            biases: gb,
        },
    ))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainParams {
    pub hidden: usize,
    pub epochs: usize,
    pub learning_rate: f64,
    pub batch_size: usize,
    pub seed: u64,
}

impl Default for TrainParams {
    fn default() -> Self {
        Self {
            hidden: 32,
            epochs: 30,
            learning_rate: 1.0,
            batch_size: 8,
            seed: 0,
        }
    }
}

/// Mini-batch gradient descent on `(input, target)` pairs. Batches are
/// drawn from a seeded shuffle, so training is deterministic.
pub fn train_network(net: &mut Mlp, samples: &[(Vec<f64>, Vec<f64>)], params: &TrainParams) -> Result<()> {
    if samples.is_empty() {
        return Err(Error::insufficient("no training samples"));
    }
    if params.batch_size == 0 || !(params.learning_rate > 0.0) {
        return Err(Error::InvalidParameter(
            "batch size and learning rate must be positive".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed ^ 0x5eed);
    let mut order: Vec<usize> = (0..samples.len()).collect();
    for _ in 0..params.epochs {
        order.shuffle(&mut rng);
        for batch in order.chunks(params.batch_size) {
            let mut acc: Option<Gradients> = None;
            for &i in batch {
                let (_, g) = loss_and_gradients(net, &samples[i].0, &samples[i].1)?;
                acc = Some(match acc {
                    None => g,
                    Some(mut a) => {
                        for (x, y) in a.weights.iter_mut().flatten().zip(g.weights.iter().flatten()) {
                            *x += y;
                        }
                        for (x, y) in a.biases.iter_mut().flatten().zip(g.biases.iter().flatten()) {
                            *x += y;
                        }
                        a
                    }
                });
            }
            let g = acc.expect("non-empty batch");
            let step = params.learning_rate / batch.len() as f64;
            for (w, d) in net.weights.iter_mut().flatten().zip(g.weights.iter().flatten()) {
                *w -= step * d;
            }
            for (b, d) in net.biases.iter_mut().flatten().zip(g.biases.iter().flatten()) {
                *b -= step * d;
            }
        }
    }
    Ok(())
}

/// Trains a classifier over `alphabet` from `(features, class index)`
/// samples, with one-hot targets. Every class must be represented.
pub fn mlp_train(samples: &[(Vec<f64>, usize)], alphabet: &str, params: &TrainParams) -> Result<Mlp> {
    let classes = alphabet.chars().count();
    if classes == 0 || samples.is_empty() {
        return Err(Error::insufficient("empty alphabet or training set"));
    }
    let mut seen = vec![false; classes];
    for (_, c) in samples {
        if *c >= classes {
            return Err(Error::InvalidParameter(format!("class index {c} outside alphabet")));
        }
        seen[*c] = true;
    }
    if let Some(missing) = seen.iter().position(|s| !s) {
        let ch = alphabet.chars().nth(missing).unwrap_or('?');
        return Err(Error::InsufficientData(format!("no samples for class '{ch}'")));
    }
    let dim = samples[0].0.len();
    let mut net = Mlp::random(&[dim, params.hidden, classes], params.seed)?;
    net.alphabet = alphabet.into();
    let targets: Vec<(Vec<f64>, Vec<f64>)> = samples
        .iter()
        .map(|(x, c)| {
            let mut t = vec![0.0; classes];
            t[*c] = 1.0;
            (x.clone(), t)
        })
        .collect();
    train_network(&mut net, &targets, params)?;
    Ok(net)
}

/// Index and activation of the strongest output.
pub fn argmax(outputs: &[f64]) -> (usize, f64) {
    outputs.iter().copied().enumerate().fold(
        (0, f64::NEG_INFINITY),
        |best, (i, v)| if v > best.1 { (i, v) } else { best },
    )
}
