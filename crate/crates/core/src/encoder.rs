//! Builds the slack-relaxed linear program for a query.
//!
//! Variables are the ambient input `x` followed by one slack per ReLU neuron.
//! Each slack sits above both ReLU branches (`s ≥ 0`, `s ≥ W y + b`), and the
//! objective pushes slacks down with heavier weights on shallower layers. A
//! solution whose slacks are all tight is an actual input/output pair.

use std::collections::BTreeSet;
use std::ops::Range;

use ndarray::Array1;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::Region;
use crate::lp::{Constraint, LinearProgram, Sense, Tag};
use crate::network::{Network, NeuronId, Phase};
use crate::properties::VerificationQuery;

/// Largest to smallest objective weight.
pub const DEFAULT_WEIGHT_RANGE: f64 = 1e6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Origin {
    Search,
    Inferred,
}

/// Fixes one neuron to a phase.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct ConditioningDecision {
    pub neuron: NeuronId,
    pub phase: Phase,
    pub origin: Origin,
}

impl ConditioningDecision {
    pub fn search(neuron: NeuronId, phase: Phase) -> Self {
        Self { neuron, phase, origin: Origin::Search }
    }

    pub fn inferred(neuron: NeuronId, phase: Phase) -> Self {
        Self { neuron, phase, origin: Origin::Inferred }
    }
}

/// `coeffs · v + constant` over the program's variables.
#[derive(Debug, Clone)]
struct LinearForm {
    coeffs: Vec<f64>,
    constant: f64,
}

impl LinearForm {
    fn eval(&self, v: &[f64]) -> f64 {
        self.coeffs.iter().zip(v).map(|(a, b)| a * b).sum::<f64>() + self.constant
    }
}

/// The relaxed program together with its neuron/variable/constraint index.
#[derive(Debug, Clone)]
pub struct RelaxedProgram {
    pub lp: LinearProgram,
    input_vars: Range<usize>,
    slack_vars: Vec<Vec<usize>>,
    preacts: Vec<Vec<LinearForm>>,
    outputs: Vec<LinearForm>,
    decisions: Vec<(ConditioningDecision, Tag)>,
}

/// Slack and pre-activation of a neuron in an LP solution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NeuronValue {
    pub neuron: NeuronId,
    pub slack: f64,
    pub preactivation: f64,
}

impl NeuronValue {
    /// Distance of the slack above `max(0, pre-activation)`.
    pub fn residual(&self) -> f64 {
        self.slack - self.preactivation.max(0.0)
    }

    /// Phase suggested by the solution.
    pub fn implied_phase(&self) -> Phase {
        Phase::of(self.preactivation)
    }
}

impl RelaxedProgram {
    pub fn input_vars(&self) -> Range<usize> {
        self.input_vars.clone()
    }

    pub fn slack_var(&self, id: NeuronId) -> usize {
        self.slack_vars[id.layer][id.index]
    }

    pub fn decisions(&self) -> &[(ConditioningDecision, Tag)] {
        &self.decisions
    }

    pub fn tag_of(&self, id: NeuronId) -> Option<Tag> {
        self.decisions
            .iter()
            .find(|(d, _)| d.neuron == id)
            .map(|(_, t)| *t)
    }

    pub fn tags_with_origin(&self, origin: Origin) -> Vec<Tag> {
        self.decisions
            .iter()
            .filter(|(d, _)| d.origin == origin)
            .map(|(_, t)| *t)
            .collect()
    }

    pub fn neuron_value(&self, id: NeuronId, sol: &[f64]) -> NeuronValue {
        NeuronValue {
            neuron: id,
            slack: sol[self.slack_var(id)],
            preactivation: self.preacts[id.layer][id.index].eval(sol),
        }
    }

    pub fn neuron_values(&self, sol: &[f64]) -> Vec<NeuronValue> {
        self.slack_vars
            .iter()
            .enumerate()
            .flat_map(|(l, row)| (0..row.len()).map(move |j| NeuronId::new(l, j)))
            .map(|id| self.neuron_value(id, sol))
            .collect()
    }

    /// Network output as read off the program's variables.
    pub fn output_value(&self, sol: &[f64]) -> Array1<f64> {
        self.outputs.iter().map(|f| f.eval(sol)).collect()
    }
}

/// `q_i = ratio^(n-1-i)` for layers `i = 0..n`: shallowest heaviest, deepest 1.
pub fn layer_weights(n: usize, ratio: f64) -> Vec<f64> {
    (0..n).map(|i| ratio.powi((n - 1 - i) as i32)).collect()
}

/// Per-layer ratio that spreads the weights over `range` exactly.
pub fn default_ratio(n: usize, range: f64) -> f64 {
    range.powf(1.0 / n.saturating_sub(1).max(1) as f64)
}

pub fn encode(
    net: &Network,
    query: &VerificationQuery,
    decisions: &[ConditioningDecision],
    weights: &[f64],
) -> Result<RelaxedProgram> {
    query.validate(net)?;
    let relu_layers = net.relu_layer_count();
    if weights.len() != relu_layers {
        return Err(Error::Shape(format!(
            "{} objective weights for {} ReLU layers",
            weights.len(),
            relu_layers
        )));
    }
    if weights.iter().any(|w| !(w.is_finite() && *w > 0.0)) {
        return Err(Error::Value("objective weights must be positive".into()));
    }
    let mut seen = BTreeSet::new();
    for d in decisions {
        if !net.is_relu_layer(d.neuron.layer)
            || d.neuron.index >= net.layers()[d.neuron.layer].width()
        {
            return Err(Error::Shape(format!("no ReLU neuron {}", d.neuron)));
        }
        if !seen.insert(d.neuron) {
            return Err(Error::InconsistentDecisions(d.neuron));
        }
    }

    let mut lp = LinearProgram::new();
    let dim = query.ambient_dim();
    let input_vars = 0..dim;
    match &query.input_set {
        Region::Box(b) => {
            for i in 0..dim {
                lp.add_variable(format!("x{i}"), b.lower()[i], b.upper()[i]);
            }
        }
        Region::Polytope(_) => {
            for i in 0..dim {
                lp.add_variable(format!("x{i}"), f64::NEG_INFINITY, f64::INFINITY);
            }
        }
    }
    let slack_vars: Vec<Vec<usize>> = net
        .relu_widths()
        .iter()
        .enumerate()
        .map(|(l, &w)| {
            (0..w)
                .map(|j| lp.add_variable(format!("y{}_{}", l + 1, j + 1), 0.0, f64::INFINITY))
                .collect()
        })
        .collect();
    let width = lp.num_variables();

    // network input as forms over x
    let mut current: Vec<LinearForm> = (0..net.input_dim())
        .map(|k| match &query.input_map {
            Some(m) => {
                let mut coeffs = vec![0.0; width];
                coeffs[..dim]
                    .iter_mut()
                    .zip(m.matrix().row(k))
                    .for_each(|(c, v)| *c = *v);
                LinearForm { coeffs, constant: m.offset()[k] }
            }
            None => {
                let mut coeffs = vec![0.0; width];
                coeffs[k] = 1.0;
                LinearForm { coeffs, constant: 0.0 }
            }
        })
        .collect();
    let mut preacts = Vec::with_capacity(relu_layers);
    for (l, layer) in net.layers().iter().enumerate() {
        let forms: Vec<LinearForm> = (0..layer.width())
            .map(|j| {
                let mut coeffs = vec![0.0; width];
                let mut constant = layer.bias()[j];
                for (k, f) in current.iter().enumerate() {
                    let w = layer.weights()[[j, k]];
                    if w != 0.0 {
                        coeffs.iter_mut().zip(&f.coeffs).for_each(|(c, v)| *c += w * v);
                        constant += w * f.constant;
                    }
                }
                LinearForm { coeffs, constant }
            })
            .collect();
        if net.is_relu_layer(l) {
            current = slack_vars[l]
                .iter()
                .map(|&v| {
                    let mut coeffs = vec![0.0; width];
                    coeffs[v] = 1.0;
                    LinearForm { coeffs, constant: 0.0 }
                })
                .collect();
            preacts.push(forms);
        } else {
            current = forms;
        }
    }
    let outputs = current;

    if let Region::Polytope(p) = &query.input_set {
        for c in p.lp_rows(width, 0) {
            lp.add_constraint(c)?;
        }
    }
    // s - (a·v + c) ≥ 0
    for (l, row) in preacts.iter().enumerate() {
        for (j, f) in row.iter().enumerate() {
            let mut coeffs: Vec<f64> = f.coeffs.iter().map(|v| -v).collect();
            coeffs[slack_vars[l][j]] += 1.0;
            lp.add_constraint(Constraint::new(coeffs, Sense::Ge, f.constant))?;
        }
    }
    let vio = &query.violation_set;
    for (row, &rhs) in vio.a().outer_iter().zip(vio.b()) {
        let mut coeffs = vec![0.0; width];
        let mut constant = 0.0;
        for (a, f) in row.iter().zip(&outputs) {
            coeffs.iter_mut().zip(&f.coeffs).for_each(|(c, v)| *c += a * v);
            constant += a * f.constant;
        }
        lp.add_constraint(Constraint::new(coeffs, Sense::Le, rhs - constant))?;
    }
    for c in &query.coupled {
        let mut coeffs = vec![0.0; width];
        coeffs[..dim]
            .iter_mut()
            .zip(c.gx.iter())
            .for_each(|(a, v)| *a = *v);
        let mut constant = 0.0;
        for (a, f) in c.gz.iter().zip(&outputs) {
            coeffs.iter_mut().zip(&f.coeffs).for_each(|(x, v)| *x += a * v);
            constant += a * f.constant;
        }
        lp.add_constraint(Constraint::new(coeffs, Sense::Le, c.g - constant))?;
    }

    let mut tagged = Vec::with_capacity(decisions.len());
    for (i, d) in decisions.iter().enumerate() {
        let tag = Tag(i as u32);
        let f = &preacts[d.neuron.layer][d.neuron.index];
        let s = slack_vars[d.neuron.layer][d.neuron.index];
        match d.phase {
            Phase::Active => {
                // s = a·v + c
                let mut coeffs: Vec<f64> = f.coeffs.iter().map(|v| -v).collect();
                coeffs[s] += 1.0;
                lp.add_constraint(Constraint::new(coeffs, Sense::Eq, f.constant).tagged(tag))?;
            }
            Phase::Inactive => {
                let mut zero = vec![0.0; width];
                zero[s] = 1.0;
                lp.add_constraint(Constraint::new(zero, Sense::Eq, 0.0).tagged(tag))?;
                lp.add_constraint(
                    Constraint::new(f.coeffs.clone(), Sense::Le, -f.constant).tagged(tag),
                )?;
            }
        }
        tagged.push((*d, tag));
    }

    for (l, row) in slack_vars.iter().enumerate() {
        for &v in row {
            lp.set_objective_coeff(v, weights[l]);
        }
    }
    Ok(RelaxedProgram {
        lp,
        input_vars,
        slack_vars,
        preacts,
        outputs,
        decisions: tagged,
    })
}

/// Unconditioned neurons whose slack exceeds `max(0, pre-activation) + tol`,
/// by layer ascending and then by residual descending.
pub fn indeterminate_neurons(prog: &RelaxedProgram, sol: &[f64], tol: f64) -> Vec<NeuronValue> {
    let conditioned: BTreeSet<NeuronId> = prog.decisions.iter().map(|(d, _)| d.neuron).collect();
    let mut out: Vec<NeuronValue> = prog
        .neuron_values(sol)
        .into_iter()
        .filter(|v| !conditioned.contains(&v.neuron) && v.residual() > tol)
        .collect();
    out.sort_by(|a, b| {
        a.neuron
            .layer
            .cmp(&b.neuron.layer)
            .then(b.residual().total_cmp(&a.residual()))
            .then(a.neuron.index.cmp(&b.neuron.index))
    });
    out
}

/// The ambient input block of a solution.
pub fn extract_candidate_input(prog: &RelaxedProgram, sol: &[f64]) -> Array1<f64> {
    Array1::from(sol[prog.input_vars()].to_vec())
}
