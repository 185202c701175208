//! Random networks and queries for oracle comparisons and benchmarks.
//!
//! Instances are made SAFE or UNSAFE with a margin: one violation row sits
//! just above or just below the exact maximum of a random output direction,
//! which the enumeration oracle computes.

use ndarray::{Array1, Array2};
use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{HyperBox, Polytope, Region};
use crate::network::{Layer, Network};
use crate::oracle::max_linear_output;
use crate::properties::VerificationQuery;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct InstanceParams {
    /// Affine layers, at least 1.
    pub max_layers: usize,
    pub max_width: usize,
    pub max_dim: usize,
    pub max_outputs: usize,
    pub max_violation_rows: usize,
    /// Distance between the violation row and the exact output maximum,
    /// relative to the output range.
    pub margin: f64,
}

impl Default for InstanceParams {
    fn default() -> Self {
        Self {
            max_layers: 3,
            max_width: 6,
            max_dim: 3,
            max_outputs: 3,
            max_violation_rows: 3,
            margin: 0.05,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Intended {
    Safe,
    Unsafe,
}

#[derive(Debug, Clone)]
pub struct Instance {
    pub net: Network,
    pub query: VerificationQuery,
    pub intended: Intended,
}

/// Weights uniform in [-1, 1], biases in [-0.5, 0.5].
pub fn random_network<R: Rng>(rng: &mut R, dims: &[usize], final_relu: bool) -> Result<Network> {
    if dims.len() < 2 {
        return Err(Error::Value("a network needs an input and an output width".into()));
    }
    let layers = dims
        .windows(2)
        .map(|p| {
            Layer::new(
                Array2::from_shape_fn((p[1], p[0]), |_| rng.gen_range(-1.0..=1.0)),
                Array1::from_shape_fn(p[1], |_| rng.gen_range(-0.5..=0.5)),
            )
        })
        .collect::<Result<Vec<_>>>()?;
    Network::new(dims[0], layers, final_relu)
}

pub fn random_box<R: Rng>(rng: &mut R, dim: usize) -> Result<HyperBox> {
    let lower = Array1::from_shape_fn(dim, |_| rng.gen_range(-1.0..0.5));
    let width = Array1::from_shape_fn(dim, |_| rng.gen_range(0.2..1.5));
    HyperBox::new(lower.clone(), lower + width)
}

fn unit_vector<R: Rng>(rng: &mut R, dim: usize) -> Array1<f64> {
    loop {
        let v: Array1<f64> = Array1::from_shape_fn(dim, |_| rng.gen_range(-1.0..=1.0));
        let n = v.dot(&v).sqrt();
        if n > 1e-3 {
            return v / n;
        }
    }
}

/// Violation polytope for `net` over `input` with the intended verdict.
pub fn query_for<R: Rng>(
    rng: &mut R,
    net: &Network,
    input: Region,
    params: &InstanceParams,
    intended: Intended,
) -> Result<VerificationQuery> {
    let k = net.output_dim();
    let c = unit_vector(rng, k);
    let probe = VerificationQuery::simple(input.clone(), Polytope::whole_space(k));
    let (top, x_top) = max_linear_output(net, &probe, c.view())?
        .ok_or_else(|| Error::Domain("input set is empty".into()))?;
    let (bottom, _) = max_linear_output(net, &probe, (-&c).view())?
        .ok_or_else(|| Error::Domain("input set is empty".into()))?;
    let range = (top + bottom).max(1e-3);
    let margin = params.margin * range;
    let threshold = match intended {
        Intended::Safe => top + margin,
        Intended::Unsafe => top - margin,
    };
    let z_top = net.eval(x_top.view())?;

    let rows = rng.gen_range(1..=params.max_violation_rows);
    let mut a = Array2::zeros((rows, k));
    let mut b = Array1::zeros(rows);
    a.row_mut(0).assign(&(-&c));
    b[0] = -threshold;
    for r in 1..rows {
        let dir = unit_vector(rng, k);
        // keeps the maximizer inside so the UNSAFE intent survives
        b[r] = dir.dot(&z_top) + rng.gen_range(0.0..=range);
        a.row_mut(r).assign(&dir);
    }
    Ok(VerificationQuery::simple(input, Polytope::new(a, b)?))
}

/// Draws one instance; `intended` is the verdict it was built to have.
pub fn random_instance<R: Rng>(rng: &mut R, params: &InstanceParams, intended: Intended) -> Result<Instance> {
    let dim = rng.gen_range(1..=params.max_dim);
    let layers = rng.gen_range(1..=params.max_layers);
    // a single linear layer has no ReLU to branch on
    let final_relu = layers == 1 || rng.gen_bool(0.3);
    let mut dims = vec![dim];
    for _ in 1..layers {
        dims.push(rng.gen_range(1..=params.max_width));
    }
    dims.push(rng.gen_range(1..=params.max_outputs.min(params.max_width)));
    let net = random_network(rng, &dims, final_relu)?;
    let input = Region::Box(random_box(rng, dim)?);
    let query = query_for(rng, &net, input, params, intended)?;
    Ok(Instance { net, query, intended })
}
