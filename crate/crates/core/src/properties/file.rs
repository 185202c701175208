use ndarray::{Array1, Array2};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{HyperBox, Polytope};
use crate::network::{rows_to_matrix, AffineMap, Network};

use super::{closed_loop_queries, robustness_queries, ClosedLoopSpec, RobustnessSpec, VerificationQuery};

/// Property file contents, tagged by `"type"`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
enum PropertyFile {
    Robustness {
        anchor: Vec<f64>,
        epsilon: f64,
        true_class: usize,
        #[serde(default)]
        num_classes: Option<usize>,
        #[serde(default)]
        clip: Option<HyperBox>,
    },
    ClosedLoop {
        regions: Vec<Polytope>,
        obstacles: Vec<Polytope>,
        #[serde(rename = "A")]
        a: Vec<Vec<f64>>,
        #[serde(rename = "B")]
        b: Vec<Vec<f64>>,
        #[serde(rename = "H")]
        h: Vec<Vec<f64>>,
        d: Vec<f64>,
    },
    Raw(VerificationQuery),
}

#[derive(Debug, Clone, PartialEq)]
pub enum Property {
    Robustness(RobustnessSpec),
    ClosedLoop(ClosedLoopSpec),
    Raw(VerificationQuery),
}

/// A query with a stable identifier for reports.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledQuery {
    pub id: String,
    pub query: VerificationQuery,
}

fn matrix(rows: &[Vec<f64>], cols: usize, name: &str) -> Result<Array2<f64>> {
    if rows.iter().any(|r| r.len() != cols) {
        return Err(Error::Shape(format!("every row of {name} must have {cols} entries")));
    }
    rows_to_matrix(rows, cols)
}

impl Property {
    /// Parses a property file. The class count of a robustness property
    /// defaults to the network's output width.
    pub fn from_json(text: &str, net: &Network) -> Result<Property> {
        let file: PropertyFile = serde_json::from_str(text)?;
        let prop = match file {
            PropertyFile::Robustness { anchor, epsilon, true_class, num_classes, clip } => {
                let m = num_classes.unwrap_or(net.output_dim());
                if m != net.output_dim() {
                    return Err(Error::Dimension(format!(
                        "property names {m} classes but the network has {} outputs",
                        net.output_dim()
                    )));
                }
                if anchor.len() != net.input_dim() {
                    return Err(Error::Dimension(format!(
                        "anchor has {} entries but the network takes {}",
                        anchor.len(),
                        net.input_dim()
                    )));
                }
                let spec = RobustnessSpec {
                    anchor: Array1::from(anchor),
                    epsilon,
                    true_class,
                    num_classes: m,
                    clip,
                };
                spec.validate()?;
                Property::Robustness(spec)
            }
            PropertyFile::ClosedLoop { regions, obstacles, a, b, h, d } => {
                let n = a.len();
                let spec = ClosedLoopSpec {
                    regions,
                    obstacles,
                    a: matrix(&a, n, "A")?,
                    b: matrix(&b, net.output_dim(), "B")?,
                    observation: AffineMap::new(matrix(&h, n, "H")?, Array1::from(d))?,
                };
                spec.validate_for(net)?;
                Property::ClosedLoop(spec)
            }
            PropertyFile::Raw(q) => {
                q.validate(net)?;
                Property::Raw(q)
            }
        };
        Ok(prop)
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Property::Robustness(_) => "robustness",
            Property::ClosedLoop(_) => "closed_loop",
            Property::Raw(_) => "raw",
        }
    }

    pub fn queries(&self) -> Result<Vec<LabeledQuery>> {
        Ok(match self {
            Property::Robustness(s) => robustness_queries(s)?
                .into_iter()
                .map(|(m, query)| LabeledQuery { id: format!("class-{m}"), query })
                .collect(),
            Property::ClosedLoop(s) => closed_loop_queries(s)?
                .into_iter()
                .map(|((m, t), query)| LabeledQuery { id: format!("region-{m}/obstacle-{t}"), query })
                .collect(),
            Property::Raw(q) => vec![LabeledQuery { id: "query".into(), query: q.clone() }],
        })
    }
}
