use ndarray::{Array1, Array2};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{HyperBox, Polytope, Region};
use crate::network::Network;
use crate::search::{verify, VerifierConfig, Verdict, VerifyOutcome, UnknownReason};

use super::VerificationQuery;

/// Max-norm robustness around an anchor input.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(from = "RobustnessRepr", into = "RobustnessRepr")]
pub struct RobustnessSpec {
    pub anchor: Array1<f64>,
    pub epsilon: f64,
    pub true_class: usize,
    pub num_classes: usize,
    pub clip: Option<HyperBox>,
}

#[derive(Serialize, Deserialize)]
struct RobustnessRepr {
    anchor: Vec<f64>,
    epsilon: f64,
    true_class: usize,
    num_classes: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    clip: Option<HyperBox>,
}

impl From<RobustnessRepr> for RobustnessSpec {
    fn from(r: RobustnessRepr) -> Self {
        Self {
            anchor: Array1::from(r.anchor),
            epsilon: r.epsilon,
            true_class: r.true_class,
            num_classes: r.num_classes,
            clip: r.clip,
        }
    }
}

impl From<RobustnessSpec> for RobustnessRepr {
    fn from(s: RobustnessSpec) -> Self {
        Self {
            anchor: s.anchor.to_vec(),
            epsilon: s.epsilon,
            true_class: s.true_class,
            num_classes: s.num_classes,
            clip: s.clip,
        }
    }
}

impl RobustnessSpec {
    /// `epsilon = 0` is accepted and yields a single-point input set.
    pub fn validate(&self) -> Result<()> {
        if self.num_classes < 2 || self.true_class >= self.num_classes {
            return Err(Error::Value(format!(
                "true class {} is not one of {} classes",
                self.true_class, self.num_classes
            )));
        }
        if !(self.epsilon >= 0.0 && self.epsilon.is_finite()) {
            return Err(Error::Value(format!("epsilon must be finite and non-negative, got {}", self.epsilon)));
        }
        if self.anchor.iter().any(|v| !v.is_finite()) {
            return Err(Error::Value("anchor is not finite".into()));
        }
        if let Some(c) = &self.clip {
            if c.dim() != self.anchor.len() {
                return Err(Error::Dimension(format!(
                    "clip box has dimension {} but the anchor has {}",
                    c.dim(),
                    self.anchor.len()
                )));
            }
        }
        Ok(())
    }

    pub fn input_box(&self) -> Result<HyperBox> {
        let ball = HyperBox::around(self.anchor.view(), self.epsilon)?;
        match &self.clip {
            None => Ok(ball),
            Some(c) => ball
                .intersect(c)?
                .ok_or_else(|| Error::Value("clip box does not meet the epsilon ball".into())),
        }
    }
}

/// Rows `z_i - z_m ≤ 0` for every `i ≠ m`: class `m` is (weakly) maximal.
pub fn class_maximal_set(num_classes: usize, m: usize) -> Polytope {
    let rows = num_classes - 1;
    let mut a = Array2::zeros((rows, num_classes));
    for (r, i) in (0..num_classes).filter(|&i| i != m).enumerate() {
        a[[r, i]] = 1.0;
        a[[r, m]] = -1.0;
    }
    Polytope::new(a, Array1::zeros(rows)).expect("shapes agree")
}

/// One query per class other than the true one, paired with that class.
pub fn robustness_queries(spec: &RobustnessSpec) -> Result<Vec<(usize, VerificationQuery)>> {
    spec.validate()?;
    let input = Region::Box(spec.input_box()?);
    Ok((0..spec.num_classes)
        .filter(|&m| m != spec.true_class)
        .map(|m| (m, VerificationQuery::simple(input.clone(), class_maximal_set(spec.num_classes, m))))
        .collect())
}

#[derive(Debug, Clone, PartialEq)]
pub enum RobustnessVerdict {
    Robust,
    NotRobust { witness: Array1<f64>, output: Array1<f64>, class: usize },
    Unknown(UnknownReason),
}

impl RobustnessVerdict {
    pub fn name(&self) -> &'static str {
        match self {
            RobustnessVerdict::Robust => "ROBUST",
            RobustnessVerdict::NotRobust { .. } => "NOT_ROBUST",
            RobustnessVerdict::Unknown(_) => "UNKNOWN",
        }
    }

    /// Combines per-class verdicts: any witness wins, then any unknown.
    pub fn aggregate<'a>(per_class: impl IntoIterator<Item = (usize, &'a Verdict)>) -> Self {
        let mut unknown = None;
        for (class, v) in per_class {
            match v {
                Verdict::Unsafe { input, output } => {
                    return RobustnessVerdict::NotRobust {
                        witness: input.clone(),
                        output: output.clone(),
                        class,
                    }
                }
                Verdict::Unknown(r) => {
                    unknown.get_or_insert(*r);
                }
                Verdict::Safe => {}
            }
        }
        unknown.map_or(RobustnessVerdict::Robust, RobustnessVerdict::Unknown)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RobustnessOutcome {
    pub verdict: RobustnessVerdict,
    /// Queries actually run, in class order.
    pub per_class: Vec<(usize, VerifyOutcome)>,
}

/// Runs the per-class queries in order and stops at the first witness.
pub fn check_robustness(net: &Network, spec: &RobustnessSpec, cfg: &VerifierConfig) -> Result<RobustnessOutcome> {
    if spec.num_classes != net.output_dim() {
        return Err(Error::Dimension(format!(
            "{} classes but the network has {} outputs",
            spec.num_classes,
            net.output_dim()
        )));
    }
    let mut per_class = Vec::new();
    for (m, q) in robustness_queries(spec)? {
        let out = verify(net, &q, cfg)?;
        let stop = out.verdict.is_unsafe();
        per_class.push((m, out));
        if stop {
            break;
        }
    }
    let verdict = RobustnessVerdict::aggregate(per_class.iter().map(|(m, o)| (*m, &o.verdict)));
    Ok(RobustnessOutcome { verdict, per_class })
}

/// Index of the largest entry, lowest index on ties.
pub fn argmax(v: &Array1<f64>) -> usize {
    v.iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |(bi, bv), (i, &x)| if x > bv { (i, x) } else { (bi, bv) })
        .0
}
