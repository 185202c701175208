//! Symbolic interval analysis over an input box.
//!
//! Each neuron's pre-activation is sandwiched between two affine expressions
//! in the ambient input variables. Concrete bounds come from optimizing those
//! expressions over the box in closed form. Straddling ReLUs use the chord as
//! upper relaxation and zero as lower relaxation.

use ndarray::{Array1, Array2, ArrayView1, Zip};

use crate::error::{Error, Result};
use crate::geometry::HyperBox;
use crate::network::{AffineMap, Network, NeuronId, Phase, PhaseLookup};

/// `coeffs · x + constant`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearExpr {
    pub coeffs: Array1<f64>,
    pub constant: f64,
}

impl LinearExpr {
    pub fn new(coeffs: Array1<f64>, constant: f64) -> Self {
        Self { coeffs, constant }
    }

    pub fn zero(dim: usize) -> Self {
        Self::new(Array1::zeros(dim), 0.0)
    }

    pub fn eval(&self, x: ArrayView1<f64>) -> f64 {
        self.coeffs.dot(&x) + self.constant
    }

    /// Minimum and maximum over `b`.
    pub fn range_over(&self, b: &HyperBox) -> (f64, f64) {
        let mut lo = self.constant;
        let mut hi = self.constant;
        for ((c, l), u) in self.coeffs.iter().zip(b.lower()).zip(b.upper()) {
            let (a, z) = (c * l, c * u);
            lo += a.min(z);
            hi += a.max(z);
        }
        (lo, hi)
    }
}

/// A block of affine expressions, one per row.
#[derive(Debug, Clone, PartialEq)]
pub struct ExprBlock {
    pub coeffs: Array2<f64>,
    pub constant: Array1<f64>,
}

impl ExprBlock {
    fn from_map(m: &AffineMap) -> Self {
        Self {
            coeffs: m.matrix().clone(),
            constant: m.offset().clone(),
        }
    }

    pub fn len(&self) -> usize {
        self.constant.len()
    }

    pub fn is_empty(&self) -> bool {
        self.constant.is_empty()
    }

    pub fn expr(&self, j: usize) -> LinearExpr {
        LinearExpr::new(self.coeffs.row(j).to_owned(), self.constant[j])
    }

    pub fn eval(&self, x: ArrayView1<f64>) -> Array1<f64> {
        self.coeffs.dot(&x) + &self.constant
    }

    fn set(&mut self, j: usize, e: &LinearExpr) {
        self.coeffs.row_mut(j).assign(&e.coeffs);
        self.constant[j] = e.constant;
    }

    fn zero_row(&mut self, j: usize) {
        self.coeffs.row_mut(j).fill(0.0);
        self.constant[j] = 0.0;
    }

    fn mins(&self, b: &HyperBox) -> Array1<f64> {
        Array1::from_shape_fn(self.len(), |j| self.expr(j).range_over(b).0)
    }

    fn maxs(&self, b: &HyperBox) -> Array1<f64> {
        Array1::from_shape_fn(self.len(), |j| self.expr(j).range_over(b).1)
    }
}

/// Bounds on the pre-activations of one layer.
#[derive(Debug, Clone, PartialEq)]
pub struct LayerBounds {
    pub lower: ExprBlock,
    pub upper: ExprBlock,
    pub concrete_lo: Array1<f64>,
    pub concrete_hi: Array1<f64>,
}

/// Pre-activation bounds for every layer, including a linear output layer.
#[derive(Debug, Clone, PartialEq)]
pub struct SymbolicBounds {
    pub layers: Vec<LayerBounds>,
}

impl SymbolicBounds {
    pub fn concrete(&self, id: NeuronId) -> (f64, f64) {
        let l = &self.layers[id.layer];
        (l.concrete_lo[id.index], l.concrete_hi[id.index])
    }
}

/// How a neuron's phase is known.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PhaseEntry {
    #[default]
    Free,
    Decided(Phase),
    Inferred(Phase),
}

impl PhaseEntry {
    pub fn phase(self) -> Option<Phase> {
        match self {
            PhaseEntry::Free => None,
            PhaseEntry::Decided(p) | PhaseEntry::Inferred(p) => Some(p),
        }
    }
}

/// Phase knowledge for every ReLU neuron.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PhaseMap {
    entries: Vec<Vec<PhaseEntry>>,
}

impl PhaseMap {
    pub fn new(net: &Network) -> Self {
        Self {
            entries: net
                .relu_widths()
                .into_iter()
                .map(|w| vec![PhaseEntry::Free; w])
                .collect(),
        }
    }

    pub fn from_decisions(
        net: &Network,
        decided: impl IntoIterator<Item = (NeuronId, Phase)>,
    ) -> Result<Self> {
        let mut map = Self::new(net);
        for (id, phase) in decided {
            if map.get(id)? != PhaseEntry::Free {
                return Err(Error::InconsistentDecisions(id));
            }
            map.entries[id.layer][id.index] = PhaseEntry::Decided(phase);
        }
        Ok(map)
    }

    pub fn get(&self, id: NeuronId) -> Result<PhaseEntry> {
        self.entries
            .get(id.layer)
            .and_then(|l| l.get(id.index))
            .copied()
            .ok_or_else(|| Error::Shape(format!("neuron {id} is not a ReLU neuron")))
    }

    pub fn set(&mut self, id: NeuronId, entry: PhaseEntry) -> Result<()> {
        self.get(id)?;
        self.entries[id.layer][id.index] = entry;
        Ok(())
    }

    pub fn layers(&self) -> &[Vec<PhaseEntry>] {
        &self.entries
    }

    fn iter(&self) -> impl Iterator<Item = (NeuronId, PhaseEntry)> + '_ {
        self.entries.iter().enumerate().flat_map(|(l, row)| {
            row.iter()
                .enumerate()
                .map(move |(j, e)| (NeuronId::new(l, j), *e))
        })
    }

    pub fn inferred(&self) -> Vec<(NeuronId, Phase)> {
        self.iter()
            .filter_map(|(id, e)| match e {
                PhaseEntry::Inferred(p) => Some((id, p)),
                _ => None,
            })
            .collect()
    }

    pub fn decided(&self) -> Vec<(NeuronId, Phase)> {
        self.iter()
            .filter_map(|(id, e)| match e {
                PhaseEntry::Decided(p) => Some((id, p)),
                _ => None,
            })
            .collect()
    }

    /// True when every neuron of layers `0..layer` has a known phase.
    pub fn prefix_fixed(&self, layer: usize) -> bool {
        self.entries[..layer.min(self.entries.len())]
            .iter()
            .all(|row| row.iter().all(|e| *e != PhaseEntry::Free))
    }
}

impl PhaseLookup for PhaseMap {
    fn phase(&self, id: NeuronId) -> Option<Phase> {
        self.entries
            .get(id.layer)
            .and_then(|l| l.get(id.index))
            .and_then(|e| e.phase())
    }
}

/// Chord upper and zero lower relaxation of a ReLU whose input lies in `[lo, hi]`.
pub fn relax_relu(
    lower: &LinearExpr,
    upper: &LinearExpr,
    lo: f64,
    hi: f64,
) -> Result<(LinearExpr, LinearExpr)> {
    if !(lo < 0.0 && hi > 0.0) {
        return Err(Error::Domain(format!(
            "relaxation needs lo < 0 < hi, got [{lo}, {hi}]"
        )));
    }
    let slope = hi / (hi - lo);
    let up = LinearExpr::new(&upper.coeffs * slope, slope * (upper.constant - lo));
    Ok((LinearExpr::zero(lower.coeffs.len()), up))
}

/// Propagates symbolic bounds through `net` over `input_box`.
///
/// `input_map` sends box coordinates to network inputs (identity when `None`).
/// Neurons with a phase in `fixed` are passed through or zeroed accordingly.
pub fn symbolic_analysis(
    net: &Network,
    input_box: &HyperBox,
    input_map: Option<&AffineMap>,
    fixed: &PhaseMap,
) -> Result<SymbolicBounds> {
    let ambient = input_box.dim();
    let start = match input_map {
        Some(m) => {
            if m.input_dim() != ambient || m.output_dim() != net.input_dim() {
                return Err(Error::Shape(format!(
                    "input map is {}→{}, box has dimension {} and the network takes {}",
                    m.input_dim(),
                    m.output_dim(),
                    ambient,
                    net.input_dim()
                )));
            }
            m.clone()
        }
        None => {
            if ambient != net.input_dim() {
                return Err(Error::Shape(format!(
                    "box has dimension {} but the network takes {}",
                    ambient,
                    net.input_dim()
                )));
            }
            AffineMap::identity(ambient)
        }
    };
    if fixed.layers().len() != net.relu_layer_count()
        || fixed
            .layers()
            .iter()
            .zip(net.relu_widths())
            .any(|(row, w)| row.len() != w)
    {
        return Err(Error::Shape("phase map does not match the network".into()));
    }

    let mut low = ExprBlock::from_map(&start);
    let mut up = low.clone();
    let mut layers = Vec::with_capacity(net.layers().len());
    for (l, layer) in net.layers().iter().enumerate() {
        let w = layer.weights();
        let wp = w.mapv(|v| v.max(0.0));
        let wn = w.mapv(|v| v.min(0.0));
        let pre_up = ExprBlock {
            coeffs: wp.dot(&up.coeffs) + wn.dot(&low.coeffs),
            constant: wp.dot(&up.constant) + wn.dot(&low.constant) + layer.bias(),
        };
        let pre_low = ExprBlock {
            coeffs: wp.dot(&low.coeffs) + wn.dot(&up.coeffs),
            constant: wp.dot(&low.constant) + wn.dot(&up.constant) + layer.bias(),
        };
        let mut concrete_lo = pre_low.mins(input_box);
        let concrete_hi = pre_up.maxs(input_box);
        // rounding can invert degenerate intervals
        Zip::from(&mut concrete_lo)
            .and(&concrete_hi)
            .for_each(|a, b| *a = a.min(*b));

        let mut post_low = pre_low.clone();
        let mut post_up = pre_up.clone();
        if net.is_relu_layer(l) {
            for j in 0..layer.width() {
                let (lo, hi) = (concrete_lo[j], concrete_hi[j]);
                let phase = fixed.phase(NeuronId::new(l, j)).or(if hi <= 0.0 {
                    Some(Phase::Inactive)
                } else if lo >= 0.0 {
                    Some(Phase::Active)
                } else {
                    None
                });
                match phase {
                    Some(Phase::Active) => {}
                    Some(Phase::Inactive) => {
                        post_low.zero_row(j);
                        post_up.zero_row(j);
                    }
                    None => {
                        let (nl, nu) = relax_relu(&pre_low.expr(j), &pre_up.expr(j), lo, hi)?;
                        post_low.set(j, &nl);
                        post_up.set(j, &nu);
                    }
                }
            }
        }
        layers.push(LayerBounds {
            lower: pre_low,
            upper: pre_up,
            concrete_lo,
            concrete_hi,
        });
        low = post_low;
        up = post_up;
    }
    Ok(SymbolicBounds { layers })
}

/// Outcome of phase inference.
#[derive(Debug, Clone, PartialEq)]
pub enum Inference {
    Consistent(PhaseMap),
    /// A decided phase contradicts the bounds of its own pre-activation.
    BranchInfeasible(NeuronId),
}

/// Adds inferred phases for free neurons whose bounds do not straddle zero.
pub fn infer_phases(bounds: &SymbolicBounds, fixed: &PhaseMap) -> Inference {
    let mut out = fixed.clone();
    for (l, row) in fixed.layers().iter().enumerate() {
        for (j, entry) in row.iter().enumerate() {
            let id = NeuronId::new(l, j);
            let (lo, hi) = bounds.concrete(id);
            match entry {
                PhaseEntry::Decided(Phase::Active) if hi < 0.0 => {
                    return Inference::BranchInfeasible(id)
                }
                PhaseEntry::Decided(Phase::Inactive) if lo > 0.0 => {
                    return Inference::BranchInfeasible(id)
                }
                PhaseEntry::Free if hi <= 0.0 => {
                    out.entries[l][j] = PhaseEntry::Inferred(Phase::Inactive)
                }
                PhaseEntry::Free if lo >= 0.0 => {
                    out.entries[l][j] = PhaseEntry::Inferred(Phase::Active)
                }
                _ => {}
            }
        }
    }
    Inference::Consistent(out)
}
