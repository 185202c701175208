//! The verification query: is there an input in the input set whose network
//! output lands in the violation set while every coupled constraint holds?

use ndarray::{Array1, ArrayView1};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Polytope, Region};
use crate::network::{AffineMap, Network};

/// `gx · x + gz · z ≤ g`, where `x` is the ambient input and `z` the network output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(from = "CoupledRepr", into = "CoupledRepr")]
pub struct CoupledConstraint {
    pub gx: Array1<f64>,
    pub gz: Array1<f64>,
    pub g: f64,
}

impl CoupledConstraint {
    pub fn value(&self, x: ArrayView1<f64>, z: ArrayView1<f64>) -> f64 {
        self.gx.dot(&x) + self.gz.dot(&z) - self.g
    }
}

#[derive(Serialize, Deserialize)]
struct CoupledRepr {
    gx: Vec<f64>,
    gz: Vec<f64>,
    g: f64,
}

impl From<CoupledRepr> for CoupledConstraint {
    fn from(r: CoupledRepr) -> Self {
        Self {
            gx: Array1::from(r.gx),
            gz: Array1::from(r.gz),
            g: r.g,
        }
    }
}

impl From<CoupledConstraint> for CoupledRepr {
    fn from(c: CoupledConstraint) -> Self {
        Self {
            gx: c.gx.to_vec(),
            gz: c.gz.to_vec(),
            g: c.g,
        }
    }
}

/// One satisfiability question. SAFE means no violating input exists.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationQuery {
    /// Bounded set over the ambient variable `x`.
    pub input_set: Region,
    /// `x ↦` network input; identity when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub input_map: Option<AffineMap>,
    /// Outputs that violate the property.
    pub violation_set: Polytope,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub coupled: Vec<CoupledConstraint>,
}

impl VerificationQuery {
    /// Box or polytope input, identity map, no coupled rows.
    pub fn simple(input_set: Region, violation_set: Polytope) -> Self {
        Self {
            input_set,
            input_map: None,
            violation_set,
            coupled: Vec::new(),
        }
    }

    pub fn ambient_dim(&self) -> usize {
        self.input_set.dim()
    }

    /// Checks every dimension against `net`.
    pub fn validate(&self, net: &Network) -> Result<()> {
        let d = self.ambient_dim();
        match &self.input_map {
            Some(m) if m.input_dim() != d || m.output_dim() != net.input_dim() => {
                return Err(Error::Dimension(format!(
                    "input map is {}→{} but the input set has dimension {} and the network takes {}",
                    m.input_dim(),
                    m.output_dim(),
                    d,
                    net.input_dim()
                )))
            }
            None if d != net.input_dim() => {
                return Err(Error::Dimension(format!(
                    "input set has dimension {} but the network takes {}",
                    d,
                    net.input_dim()
                )))
            }
            _ => {}
        }
        if self.violation_set.dim() != net.output_dim() {
            return Err(Error::Dimension(format!(
                "violation set has dimension {} but the network outputs {}",
                self.violation_set.dim(),
                net.output_dim()
            )));
        }
        for (i, c) in self.coupled.iter().enumerate() {
            if c.gx.len() != d || c.gz.len() != net.output_dim() {
                return Err(Error::Dimension(format!(
                    "coupled constraint {i} has lengths ({}, {}), expected ({d}, {})",
                    c.gx.len(),
                    c.gz.len(),
                    net.output_dim()
                )));
            }
            if !c.g.is_finite() || c.gx.iter().chain(c.gz.iter()).any(|v| !v.is_finite()) {
                return Err(Error::Value(format!("coupled constraint {i} is not finite")));
            }
        }
        Ok(())
    }

    pub fn network_input(&self, x: ArrayView1<f64>) -> Result<Array1<f64>> {
        match &self.input_map {
            Some(m) => m.apply(x),
            None => Ok(x.to_owned()),
        }
    }

    pub fn output_at(&self, net: &Network, x: ArrayView1<f64>) -> Result<Array1<f64>> {
        net.eval(self.network_input(x)?.view())
    }

    /// True iff `x` is in the input set and its output violates the property,
    /// all within `tol`.
    pub fn is_violation(&self, net: &Network, x: ArrayView1<f64>, tol: f64) -> Result<bool> {
        if x.len() != self.ambient_dim() {
            return Ok(false);
        }
        if !self.input_set.contains(x, tol)? {
            return Ok(false);
        }
        let z = self.output_at(net, x)?;
        if !self.violation_set.contains(z.view(), tol)? {
            return Ok(false);
        }
        Ok(self.coupled.iter().all(|c| c.value(x, z.view()) <= tol))
    }
}
