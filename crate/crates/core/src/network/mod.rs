//! Feed-forward ReLU networks.
//!
//! A [`Network`] is a stack of dense layers `y_i = max(W_i y_{i-1} + b_i, 0)`.
//! Layer indices in this crate are zero-based positions in [`Network::layers`],
//! so layer 0 is the first hidden transformation (the "input layer"). The output
//! layer applies a ReLU unless the network was built with `final_relu = false`.

mod affine;
mod format;

use std::fmt;

use ndarray::{Array1, Array2, ArrayView1};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use affine::AffineMap;
pub use format::{load_network, load_nnet, NetworkFormat, NnetModel};

/// Activation status of a single ReLU neuron.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Phase {
    Active,
    Inactive,
}

impl Phase {
    /// Phase recorded for a pre-activation value. Exactly zero counts as inactive.
    pub fn of(preactivation: f64) -> Phase {
        if preactivation > 0.0 {
            Phase::Active
        } else {
            Phase::Inactive
        }
    }

    pub fn flipped(self) -> Phase {
        match self {
            Phase::Active => Phase::Inactive,
            Phase::Inactive => Phase::Active,
        }
    }
}

impl fmt::Display for Phase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Phase::Active => f.write_str("ACTIVE"),
            Phase::Inactive => f.write_str("INACTIVE"),
        }
    }
}

/// Position of a neuron: zero-based layer and zero-based index within the layer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct NeuronId {
    pub layer: usize,
    pub index: usize,
}

impl NeuronId {
    pub fn new(layer: usize, index: usize) -> Self {
        Self { layer, index }
    }
}

impl fmt::Display for NeuronId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        // one-based, matching the usual y_i / (y_i)_j naming
        write!(f, "({}, {})", self.layer + 1, self.index + 1)
    }
}

/// Anything that can report a (possibly unknown) phase per neuron.
pub trait PhaseLookup {
    fn phase(&self, id: NeuronId) -> Option<Phase>;
}

/// One dense layer: `weights` is `k_i × k_{i-1}`, `bias` has length `k_i`.
#[derive(Debug, Clone, PartialEq)]
pub struct Layer {
    weights: Array2<f64>,
    bias: Array1<f64>,
}

impl Layer {
    pub fn new(weights: Array2<f64>, bias: Array1<f64>) -> Result<Self> {
        if weights.nrows() != bias.len() {
            return Err(Error::Shape(format!(
                "layer has {} weight rows but {} biases",
                weights.nrows(),
                bias.len()
            )));
        }
        if weights.nrows() == 0 || weights.ncols() == 0 {
            return Err(Error::Shape("layer must have at least one input and one neuron".into()));
        }
        if weights.iter().chain(bias.iter()).any(|v| !v.is_finite()) {
            return Err(Error::Value("layer contains a non-finite weight or bias".into()));
        }
        Ok(Self { weights, bias })
    }

    pub fn weights(&self) -> &Array2<f64> {
        &self.weights
    }

    pub fn bias(&self) -> &Array1<f64> {
        &self.bias
    }

    pub fn input_dim(&self) -> usize {
        self.weights.ncols()
    }

    pub fn width(&self) -> usize {
        self.weights.nrows()
    }

    pub fn preactivation(&self, input: ArrayView1<f64>) -> Array1<f64> {
        self.weights.dot(&input) + &self.bias
    }
}

/// A validated feed-forward ReLU network. Immutable once built.
#[derive(Debug, Clone, PartialEq)]
pub struct Network {
    input_dim: usize,
    layers: Vec<Layer>,
    final_relu: bool,
}

impl Network {
    pub fn new(input_dim: usize, layers: Vec<Layer>, final_relu: bool) -> Result<Self> {
        if layers.is_empty() {
            return Err(Error::Shape("network needs at least one layer".into()));
        }
        let mut expected = input_dim;
        for (i, layer) in layers.iter().enumerate() {
            if layer.input_dim() != expected {
                return Err(Error::Shape(format!(
                    "layer {} expects {} inputs but the previous stage produces {}",
                    i + 1,
                    layer.input_dim(),
                    expected
                )));
            }
            expected = layer.width();
        }
        Ok(Self {
            input_dim,
            layers,
            final_relu,
        })
    }

    pub fn input_dim(&self) -> usize {
        self.input_dim
    }

    pub fn output_dim(&self) -> usize {
        self.layers.last().map(Layer::width).unwrap_or(0)
    }

    pub fn layers(&self) -> &[Layer] {
        &self.layers
    }

    pub fn final_relu(&self) -> bool {
        self.final_relu
    }

    /// Number of layers followed by a ReLU.
    pub fn relu_layer_count(&self) -> usize {
        if self.final_relu {
            self.layers.len()
        } else {
            self.layers.len() - 1
        }
    }

    pub fn is_relu_layer(&self, layer: usize) -> bool {
        layer < self.relu_layer_count()
    }

    /// Widths of the ReLU layers.
    pub fn relu_widths(&self) -> Vec<usize> {
        self.layers[..self.relu_layer_count()]
            .iter()
            .map(Layer::width)
            .collect()
    }

    /// Total number of ReLU neurons.
    pub fn relu_count(&self) -> usize {
        self.relu_widths().iter().sum()
    }

    /// All ReLU neurons, shallowest layer first.
    pub fn relu_neurons(&self) -> impl Iterator<Item = NeuronId> + '_ {
        self.layers[..self.relu_layer_count()]
            .iter()
            .enumerate()
            .flat_map(|(l, layer)| (0..layer.width()).map(move |j| NeuronId::new(l, j)))
    }

    pub fn forward(&self, x: ArrayView1<f64>) -> Result<ForwardPass> {
        if x.len() != self.input_dim {
            return Err(Error::Shape(format!(
                "network expects input of length {}, got {}",
                self.input_dim,
                x.len()
            )));
        }
        let mut preacts = Vec::with_capacity(self.layers.len());
        let mut activations = Vec::with_capacity(self.layers.len());
        let mut phases = Vec::with_capacity(self.layers.len());
        let mut current = x.to_owned();
        for (l, layer) in self.layers.iter().enumerate() {
            let pre = layer.preactivation(current.view());
            phases.push(pre.iter().map(|&v| Phase::of(v)).collect());
            let post = if self.is_relu_layer(l) {
                pre.mapv(|v| v.max(0.0))
            } else {
                pre.clone()
            };
            preacts.push(pre);
            activations.push(post.clone());
            current = post;
        }
        Ok(ForwardPass {
            output: current,
            pattern: ActivationPattern { phases },
            preacts,
            activations,
        })
    }

    /// Convenience wrapper returning only the output vector.
    pub fn eval(&self, x: ArrayView1<f64>) -> Result<Array1<f64>> {
        Ok(self.forward(x)?.output)
    }

    /// Affine map from the network input to the post-activation output of the
    /// first `through_layer` layers, with every ReLU in that prefix fixed by `phases`.
    pub fn fold_affine<P: PhaseLookup + ?Sized>(
        &self,
        phases: &P,
        through_layer: usize,
    ) -> Result<AffineMap> {
        if through_layer > self.layers.len() {
            return Err(Error::Shape(format!(
                "cannot fold through layer {} of a {}-layer network",
                through_layer,
                self.layers.len()
            )));
        }
        let mut matrix = Array2::<f64>::eye(self.input_dim);
        let mut offset = Array1::<f64>::zeros(self.input_dim);
        for (l, layer) in self.layers[..through_layer].iter().enumerate() {
            matrix = layer.weights.dot(&matrix);
            offset = layer.weights.dot(&offset) + &layer.bias;
            if self.is_relu_layer(l) {
                for j in 0..layer.width() {
                    let id = NeuronId::new(l, j);
                    match phases.phase(id) {
                        Some(Phase::Active) => {}
                        Some(Phase::Inactive) => {
                            matrix.row_mut(j).fill(0.0);
                            offset[j] = 0.0;
                        }
                        None => return Err(Error::Phase(id)),
                    }
                }
            }
        }
        AffineMap::new(matrix, offset)
    }

    /// Affine map from the network input to the pre-activation of `layer`,
    /// with the ReLUs of all shallower layers fixed by `phases`.
    pub fn preactivation_map<P: PhaseLookup + ?Sized>(
        &self,
        phases: &P,
        layer: usize,
    ) -> Result<AffineMap> {
        let prefix = self.fold_affine(phases, layer)?;
        let l = self
            .layers
            .get(layer)
            .ok_or_else(|| Error::Shape(format!("no layer {layer}")))?;
        let as_map = AffineMap::new(l.weights.clone(), l.bias.clone())?;
        AffineMap::compose(&as_map, &prefix)
    }

    pub fn to_json(&self) -> serde_json::Value {
        let repr = NetworkJson {
            input_dim: self.input_dim,
            final_relu: self.final_relu,
            layers: self
                .layers
                .iter()
                .map(|l| LayerJson {
                    weights: l.weights.outer_iter().map(|r| r.to_vec()).collect(),
                    bias: l.bias.to_vec(),
                })
                .collect(),
        };
        serde_json::to_value(repr).expect("network serializes")
    }
}

/// Everything computed by one forward evaluation.
#[derive(Debug, Clone)]
pub struct ForwardPass {
    pub output: Array1<f64>,
    pub pattern: ActivationPattern,
    /// `preacts[l] = W_l y_{l-1} + b_l`.
    pub preacts: Vec<Array1<f64>>,
    /// Post-activation values `y_l`.
    pub activations: Vec<Array1<f64>>,
}

/// A full phase assignment, one entry per neuron of every layer.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ActivationPattern {
    pub phases: Vec<Vec<Phase>>,
}

impl ActivationPattern {
    pub fn get(&self, id: NeuronId) -> Option<Phase> {
        self.phases.get(id.layer).and_then(|l| l.get(id.index)).copied()
    }
}

impl PhaseLookup for ActivationPattern {
    fn phase(&self, id: NeuronId) -> Option<Phase> {
        self.get(id)
    }
}

impl<F: Fn(NeuronId) -> Option<Phase>> PhaseLookup for F {
    fn phase(&self, id: NeuronId) -> Option<Phase> {
        self(id)
    }
}

#[derive(Serialize, Deserialize)]
pub(crate) struct NetworkJson {
    pub input_dim: usize,
    #[serde(default = "default_final_relu")]
    pub final_relu: bool,
    pub layers: Vec<LayerJson>,
}

fn default_final_relu() -> bool {
    true
}

#[derive(Serialize, Deserialize)]
pub(crate) struct LayerJson {
    pub weights: Vec<Vec<f64>>,
    pub bias: Vec<f64>,
}

pub(crate) fn rows_to_matrix(rows: &[Vec<f64>], cols: usize) -> Result<Array2<f64>> {
    if let Some(bad) = rows.iter().position(|r| r.len() != cols) {
        return Err(Error::Shape(format!(
            "row {} has {} entries, expected {}",
            bad,
            rows[bad].len(),
            cols
        )));
    }
    let flat: Vec<f64> = rows.iter().flatten().copied().collect();
    Array2::from_shape_vec((rows.len(), cols), flat).map_err(|e| Error::Shape(e.to_string()))
}
