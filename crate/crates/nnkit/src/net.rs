//! Dense feedforward networks evaluated either directly on `f64` slices or
//! symbolically on a [`Tape`] so gradients reach every weight and input.

use rand::distr::{Distribution, Uniform};
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::tape::{sigmoid, NodeId, Tape};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Activation {
    Tanh,
    Sigmoid,
}

impl Activation {
    #[inline]
    fn apply(self, z: f64) -> f64 {
        match self {
            Activation::Tanh => z.tanh(),
            Activation::Sigmoid => sigmoid(z),
        }
    }

    fn apply_on(self, tape: &mut Tape, z: NodeId) -> NodeId {
        match self {
            Activation::Tanh => tape.tanh(z),
            Activation::Sigmoid => tape.sigmoid(z),
        }
    }
}

/// Output-layer activation. `Bounded` maps the raw output into `[lo, hi]`
/// via `lo + (hi - lo) * sigmoid(z)`, used wherever a rate must stay inside
/// a closed interval.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputActivation {
    Tanh,
    Sigmoid,
    Identity,
    Bounded { lo: f64, hi: f64 },
}

impl OutputActivation {
    #[inline]
    fn apply(self, z: f64) -> f64 {
        match self {
            OutputActivation::Tanh => z.tanh(),
            OutputActivation::Sigmoid => sigmoid(z),
            OutputActivation::Identity => z,
            OutputActivation::Bounded { lo, hi } => lo + (hi - lo) * sigmoid(z),
        }
    }

    fn apply_on(self, tape: &mut Tape, z: NodeId) -> NodeId {
        match self {
            OutputActivation::Tanh => tape.tanh(z),
            OutputActivation::Sigmoid => tape.sigmoid(z),
            OutputActivation::Identity => z,
            OutputActivation::Bounded { lo, hi } => {
                let s = tape.sigmoid(z);
                let lo_n = tape.constant(lo);
                let span = tape.constant(hi - lo);
                let scaled = tape.mul(span, s);
                tape.add(lo_n, scaled)
            }
        }
    }
}

#[derive(Debug, Error)]
pub enum NetError {
    #[error("input length {got} does not match first layer size {want}")]
    InputShape { got: usize, want: usize },
    #[error("need at least two layer sizes, got {0}")]
    TooFewLayers(usize),
    #[error("layer {layer}: expected {want} weights, got {got}")]
    WeightShape { layer: usize, want: usize, got: usize },
    #[error("layer {layer}: expected {want} biases, got {got}")]
    BiasShape { layer: usize, want: usize, got: usize },
    #[error("flat parameter vector has length {got}, expected {want}")]
    FlatShape { got: usize, want: usize },
    #[error("serialized document lists {got} activations, expected {want}")]
    ActivationCount { got: usize, want: usize },
    #[error("hidden layers must share one activation")]
    MixedHiddenActivations,
}

/// Fully connected feedforward network. Weights of layer `k` are row-major
/// with shape `(sizes[k+1], sizes[k])`.
#[derive(Clone, Debug, PartialEq)]
pub struct DenseNetwork {
    sizes: Vec<usize>,
    weights: Vec<Vec<f64>>,
    biases: Vec<Vec<f64>>,
    hidden: Activation,
    output: OutputActivation,
}

impl DenseNetwork {
    /// All-zero parameters. With a `Bounded` output this evaluates to the
    /// interval midpoint regardless of input.
    pub fn zeros(sizes: &[usize], hidden: Activation, output: OutputActivation) -> Result<Self, NetError> {
        if sizes.len() < 2 {
            return Err(NetError::TooFewLayers(sizes.len()));
        }
        let weights = (0..sizes.len() - 1).map(|k| vec![0.0; sizes[k + 1] * sizes[k]]).collect();
        let biases = (0..sizes.len() - 1).map(|k| vec![0.0; sizes[k + 1]]).collect();
        Ok(Self { sizes: sizes.to_vec(), weights, biases, hidden, output })
    }

    /// Xavier/Glorot uniform weights, zero biases.
    pub fn xavier<R: Rng>(
        sizes: &[usize],
        hidden: Activation,
        output: OutputActivation,
        rng: &mut R,
    ) -> Result<Self, NetError> {
        let mut net = Self::zeros(sizes, hidden, output)?;
        for k in 0..net.weights.len() {
            let limit = (6.0 / (sizes[k] + sizes[k + 1]) as f64).sqrt();
            let dist = Uniform::new_inclusive(-limit, limit).expect("valid range");
            for w in net.weights[k].iter_mut() {
                *w = dist.sample(rng);
            }
        }
        Ok(net)
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn input_len(&self) -> usize {
        self.sizes[0]
    }

    pub fn output_len(&self) -> usize {
        *self.sizes.last().unwrap()
    }

    pub fn output_activation(&self) -> OutputActivation {
        self.output
    }

    /// Total number of scalar parameters (weights then biases, layer order).
    pub fn param_count(&self) -> usize {
        self.weights.iter().map(Vec::len).sum::<usize>() + self.biases.iter().map(Vec::len).sum::<usize>()
    }

    /// Flatten parameters: per layer, weights row-major then biases.
    pub fn flatten_params(&self, out: &mut Vec<f64>) {
        for k in 0..self.weights.len() {
            out.extend_from_slice(&self.weights[k]);
            out.extend_from_slice(&self.biases[k]);
        }
    }

    /// Overwrite parameters from a flat slice laid out as in [`flatten_params`].
    ///
    /// [`flatten_params`]: DenseNetwork::flatten_params
    pub fn assign_params(&mut self, flat: &[f64]) -> Result<(), NetError> {
        if flat.len() != self.param_count() {
            return Err(NetError::FlatShape { got: flat.len(), want: self.param_count() });
        }
        let mut at = 0;
        for k in 0..self.weights.len() {
            let nw = self.weights[k].len();
            self.weights[k].copy_from_slice(&flat[at..at + nw]);
            at += nw;
            let nb = self.biases[k].len();
            self.biases[k].copy_from_slice(&flat[at..at + nb]);
            at += nb;
        }
        Ok(())
    }

    /// Plain evaluation without recording.
    pub fn forward(&self, input: &[f64]) -> Result<Vec<f64>, NetError> {
        if input.len() != self.sizes[0] {
            return Err(NetError::InputShape { got: input.len(), want: self.sizes[0] });
        }
        let last = self.weights.len() - 1;
        let mut act = input.to_vec();
        for k in 0..=last {
            let (n_out, n_in) = (self.sizes[k + 1], self.sizes[k]);
            let mut next = Vec::with_capacity(n_out);
            for j in 0..n_out {
                let mut z = self.biases[k][j];
                let row = &self.weights[k][j * n_in..(j + 1) * n_in];
                for i in 0..n_in {
                    z += row[i] * act[i];
                }
                next.push(if k == last { self.output.apply(z) } else { self.hidden.apply(z) });
            }
            act = next;
        }
        Ok(act)
    }

    /// Record this network's parameters on a tape for training. The returned
    /// binding exposes the parameter nodes in [`flatten_params`] order.
    ///
    /// [`flatten_params`]: DenseNetwork::flatten_params
    pub fn bind(&self, tape: &mut Tape) -> BoundNet {
        let mut ids = Vec::with_capacity(self.param_count());
        for k in 0..self.weights.len() {
            for &w in &self.weights[k] {
                ids.push(tape.parameter(w));
            }
            for &b in &self.biases[k] {
                ids.push(tape.parameter(b));
            }
        }
        BoundNet {
            sizes: self.sizes.clone(),
            hidden: self.hidden,
            output: self.output,
            param_ids: ids,
        }
    }
}

/// A [`DenseNetwork`] whose parameters live on a tape.
pub struct BoundNet {
    sizes: Vec<usize>,
    hidden: Activation,
    output: OutputActivation,
    param_ids: Vec<NodeId>,
}

impl BoundNet {
    pub fn param_ids(&self) -> &[NodeId] {
        &self.param_ids
    }

    /// Symbolic forward pass. The accumulation order matches
    /// [`DenseNetwork::forward`], so values agree bitwise.
    pub fn forward(&self, tape: &mut Tape, inputs: &[NodeId]) -> Result<Vec<NodeId>, NetError> {
        if inputs.len() != self.sizes[0] {
            return Err(NetError::InputShape { got: inputs.len(), want: self.sizes[0] });
        }
        let last = self.sizes.len() - 2;
        let mut at = 0;
        let mut act = inputs.to_vec();
        for k in 0..=last {
            let (n_out, n_in) = (self.sizes[k + 1], self.sizes[k]);
            let w = &self.param_ids[at..at + n_out * n_in];
            let b = &self.param_ids[at + n_out * n_in..at + n_out * n_in + n_out];
            at += n_out * n_in + n_out;
            let mut next = Vec::with_capacity(n_out);
            for j in 0..n_out {
                let mut z = b[j];
                for i in 0..n_in {
                    let prod = tape.mul(w[j * n_in + i], act[i]);
                    z = tape.add(z, prod);
                }
                next.push(if k == last {
                    self.output.apply_on(tape, z)
                } else {
                    self.hidden.apply_on(tape, z)
                });
            }
            act = next;
        }
        Ok(act)
    }
}

/// Flat JSON document for a network:
/// `{"sizes": [...], "weights": [[...]], "biases": [[...]], "activations": [...]}`
/// with one activation entry per non-input layer.
#[derive(Serialize, Deserialize)]
struct NetworkDoc {
    sizes: Vec<usize>,
    weights: Vec<Vec<f64>>,
    biases: Vec<Vec<f64>>,
    activations: Vec<ActivationEntry>,
}

#[derive(Serialize, Deserialize, Clone, Copy, PartialEq, Debug)]
#[serde(untagged)]
enum ActivationEntry {
    Named(Activation),
    Output(OutputActivation),
}

impl Serialize for DenseNetwork {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let n_layers = self.weights.len();
        let mut acts: Vec<ActivationEntry> = Vec::with_capacity(n_layers);
        for _ in 0..n_layers.saturating_sub(1) {
            acts.push(ActivationEntry::Named(self.hidden));
        }
        acts.push(ActivationEntry::Output(self.output));
        NetworkDoc {
            sizes: self.sizes.clone(),
            weights: self.weights.clone(),
            biases: self.biases.clone(),
            activations: acts,
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for DenseNetwork {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        use serde::de::Error as DeError;
        let doc = NetworkDoc::deserialize(d)?;
        let n_layers = doc.sizes.len().saturating_sub(1);
        if doc.activations.len() != n_layers {
            return Err(DeError::custom(NetError::ActivationCount {
                got: doc.activations.len(),
                want: n_layers,
            }));
        }
        let mut hidden = Activation::Tanh;
        for (k, entry) in doc.activations[..n_layers - 1].iter().enumerate() {
            let a = match entry {
                ActivationEntry::Named(a) => *a,
                ActivationEntry::Output(OutputActivation::Tanh) => Activation::Tanh,
                ActivationEntry::Output(OutputActivation::Sigmoid) => Activation::Sigmoid,
                _ => return Err(DeError::custom(NetError::MixedHiddenActivations)),
            };
            if k == 0 {
                hidden = a;
            } else if a != hidden {
                return Err(DeError::custom(NetError::MixedHiddenActivations));
            }
        }
        let output = match *doc.activations.last().unwrap() {
            ActivationEntry::Output(o) => o,
            ActivationEntry::Named(Activation::Tanh) => OutputActivation::Tanh,
            ActivationEntry::Named(Activation::Sigmoid) => OutputActivation::Sigmoid,
        };
        let mut net = DenseNetwork::zeros(&doc.sizes, hidden, output).map_err(DeError::custom)?;
        for (k, w) in doc.weights.into_iter().enumerate() {
            let want = net.sizes[k + 1] * net.sizes[k];
            if w.len() != want {
                return Err(DeError::custom(NetError::WeightShape { layer: k, want, got: w.len() }));
            }
            net.weights[k] = w;
        }
        for (k, b) in doc.biases.into_iter().enumerate() {
            let want = net.sizes[k + 1];
            if b.len() != want {
                return Err(DeError::custom(NetError::BiasShape { layer: k, want, got: b.len() }));
            }
            net.biases[k] = b;
        }
        Ok(net)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn identity_single_layer() {
        let mut net = DenseNetwork::zeros(&[2, 2], Activation::Tanh, OutputActivation::Identity).unwrap();
        net.assign_params(&[1.0, 0.0, 0.0, 1.0, 0.0, 0.0]).unwrap();
        let y = net.forward(&[0.2, 0.8]).unwrap();
        assert_eq!(y, vec![0.2, 0.8]);
    }

    #[test]
    fn one_by_one_tanh() {
        let mut net = DenseNetwork::zeros(&[1, 1], Activation::Tanh, OutputActivation::Tanh).unwrap();
        net.assign_params(&[2.0, 1.0]).unwrap();
        let y = net.forward(&[0.0]).unwrap();
        assert_relative_eq!(y[0], 0.761594, epsilon = 1e-6); // tanh(1)
    }

    #[test]
    fn sigmoid_output_in_unit_interval() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let net =
            DenseNetwork::xavier(&[3, 8, 2], Activation::Tanh, OutputActivation::Sigmoid, &mut rng).unwrap();
        for trial in 0..100 {
            let x: Vec<f64> = (0..3).map(|i| ((trial * 3 + i) as f64).sin() * 5.0).collect();
            for y in net.forward(&x).unwrap() {
                assert!(y > 0.0 && y < 1.0);
            }
        }
    }

    #[test]
    fn dimension_mismatch_rejected() {
        let net = DenseNetwork::zeros(&[2, 1], Activation::Tanh, OutputActivation::Identity).unwrap();
        assert!(matches!(net.forward(&[1.0]), Err(NetError::InputShape { .. })));
    }

    #[test]
    fn tape_forward_matches_plain() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let net = DenseNetwork::xavier(
            &[4, 16, 16, 2],
            Activation::Tanh,
            OutputActivation::Bounded { lo: -0.5, hi: 2.5 },
            &mut rng,
        )
        .unwrap();
        let x = [0.3, -1.2, 0.05, 0.9];
        let plain = net.forward(&x).unwrap();
        let mut tape = Tape::new();
        let bound = net.bind(&mut tape);
        let inputs: Vec<_> = x.iter().map(|&v| tape.input(v)).collect();
        let out = bound.forward(&mut tape, &inputs).unwrap();
        for (id, v) in out.iter().zip(&plain) {
            assert_eq!(tape.value(*id), *v); // same accumulation order, bitwise
        }
    }

    #[test]
    fn json_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let net = DenseNetwork::xavier(
            &[2, 4, 1],
            Activation::Sigmoid,
            OutputActivation::Bounded { lo: 0.01, hi: 0.3 },
            &mut rng,
        )
        .unwrap();
        let s = serde_json::to_string(&net).unwrap();
        assert!(s.contains("\"sizes\""));
        let back: DenseNetwork = serde_json::from_str(&s).unwrap();
        assert_eq!(net, back);
    }
}
