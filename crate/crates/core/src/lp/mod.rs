//! Linear programs, a dense two-phase simplex solver, and IIS extraction.

mod iis;
mod simplex;

use std::collections::BTreeSet;
use std::fmt::Write as _;

use serde::Serialize;

use crate::error::{Error, Result};

pub use iis::{extract_iis, extract_iis_with, IisReport};
pub use simplex::DenseSimplex;

/// Default primal feasibility tolerance.
pub const DEFAULT_TOL: f64 = 1e-7;

/// Label attached to a constraint so it can be referenced by IIS extraction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct Tag(pub u32);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Sense {
    Le,
    Eq,
    Ge,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Variable {
    pub name: String,
    pub lower: f64,
    pub upper: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Constraint {
    pub coeffs: Vec<f64>,
    pub sense: Sense,
    pub rhs: f64,
    pub tag: Option<Tag>,
}

impl Constraint {
    pub fn new(coeffs: Vec<f64>, sense: Sense, rhs: f64) -> Self {
        Self {
            coeffs,
            sense,
            rhs,
            tag: None,
        }
    }

    pub fn tagged(mut self, tag: Tag) -> Self {
        self.tag = Some(tag);
        self
    }

    pub fn activity(&self, x: &[f64]) -> f64 {
        self.coeffs.iter().zip(x).map(|(a, v)| a * v).sum()
    }

    /// Amount by which `x` violates this constraint (0 when satisfied).
    pub fn violation(&self, x: &[f64]) -> f64 {
        let lhs = self.activity(x);
        match self.sense {
            Sense::Le => (lhs - self.rhs).max(0.0),
            Sense::Ge => (self.rhs - lhs).max(0.0),
            Sense::Eq => (lhs - self.rhs).abs(),
        }
    }
}

/// A minimization LP over bounded (possibly infinite-bound) variables.
///
/// Values are persistent: extending a program produces a new one.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct LinearProgram {
    variables: Vec<Variable>,
    constraints: Vec<Constraint>,
    objective: Vec<f64>,
}

impl LinearProgram {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds a variable with zero objective coefficient and returns its index.
    pub fn add_variable(&mut self, name: impl Into<String>, lower: f64, upper: f64) -> usize {
        self.variables.push(Variable {
            name: name.into(),
            lower,
            upper,
        });
        self.objective.push(0.0);
        for c in &mut self.constraints {
            c.coeffs.push(0.0);
        }
        self.variables.len() - 1
    }

    pub fn add_constraint(&mut self, constraint: Constraint) -> Result<usize> {
        if constraint.coeffs.len() != self.variables.len() {
            return Err(Error::Dimension(format!(
                "constraint has {} coefficients for {} variables",
                constraint.coeffs.len(),
                self.variables.len()
            )));
        }
        if !constraint.rhs.is_finite() || constraint.coeffs.iter().any(|v| !v.is_finite()) {
            return Err(Error::Value("constraint contains a non-finite value".into()));
        }
        self.constraints.push(constraint);
        Ok(self.constraints.len() - 1)
    }

    pub fn set_objective_coeff(&mut self, var: usize, coeff: f64) {
        self.objective[var] = coeff;
    }

    pub fn set_objective(&mut self, coeffs: Vec<f64>) -> Result<()> {
        if coeffs.len() != self.variables.len() {
            return Err(Error::Dimension(format!(
                "objective has {} coefficients for {} variables",
                coeffs.len(),
                self.variables.len()
            )));
        }
        self.objective = coeffs;
        Ok(())
    }

    pub fn variables(&self) -> &[Variable] {
        &self.variables
    }

    pub fn constraints(&self) -> &[Constraint] {
        &self.constraints
    }

    pub fn objective(&self) -> &[f64] {
        &self.objective
    }

    pub fn num_variables(&self) -> usize {
        self.variables.len()
    }

    /// A copy of this program with `added` appended; `self` is untouched.
    pub fn with_constraints(&self, added: impl IntoIterator<Item = Constraint>) -> Result<Self> {
        let mut out = self.clone();
        for c in added {
            out.add_constraint(c)?;
        }
        Ok(out)
    }

    /// A copy without the constraints carrying any of `tags`.
    pub fn without_tags(&self, tags: &BTreeSet<Tag>) -> Self {
        let mut out = self.clone();
        out.constraints
            .retain(|c| c.tag.map_or(true, |t| !tags.contains(&t)));
        out
    }

    /// A copy with the objective cleared, for pure feasibility checks.
    pub fn feasibility_only(&self) -> Self {
        let mut out = self.clone();
        out.objective.iter_mut().for_each(|c| *c = 0.0);
        out
    }

    pub fn objective_value(&self, x: &[f64]) -> f64 {
        self.objective.iter().zip(x).map(|(c, v)| c * v).sum()
    }

    /// Largest constraint or bound violation at `x`.
    pub fn max_violation(&self, x: &[f64]) -> f64 {
        let bounds = self
            .variables
            .iter()
            .zip(x)
            .map(|(v, &xv)| (v.lower - xv).max(xv - v.upper).max(0.0));
        self.constraints
            .iter()
            .map(|c| c.violation(x))
            .chain(bounds)
            .fold(0.0, f64::max)
    }

    /// Renders the program in CPLEX LP text format.
    pub fn to_lp_text(&self) -> String {
        let names: Vec<String> = self
            .variables
            .iter()
            .enumerate()
            .map(|(i, v)| sanitize_name(&v.name, i))
            .collect();
        let mut out = String::from("\\ peregrine relaxed program\nMinimize\n obj:");
        write_terms(&mut out, &self.objective, &names);
        out.push_str("\nSubject To\n");
        for (i, c) in self.constraints.iter().enumerate() {
            match c.tag {
                Some(Tag(t)) => write!(out, " c{i}_t{t}:").unwrap(),
                None => write!(out, " c{i}:").unwrap(),
            }
            write_terms(&mut out, &c.coeffs, &names);
            let op = match c.sense {
                Sense::Le => "<=",
                Sense::Eq => "=",
                Sense::Ge => ">=",
            };
            writeln!(out, " {op} {}", c.rhs).unwrap();
        }
        out.push_str("Bounds\n");
        for (v, name) in self.variables.iter().zip(&names) {
            match (v.lower.is_finite(), v.upper.is_finite()) {
                (false, false) => writeln!(out, " {name} free").unwrap(),
                (true, false) => writeln!(out, " {name} >= {}", v.lower).unwrap(),
                (false, true) => writeln!(out, " -inf <= {name} <= {}", v.upper).unwrap(),
                (true, true) => writeln!(out, " {} <= {name} <= {}", v.lower, v.upper).unwrap(),
            }
        }
        out.push_str("End\n");
        out
    }
}

fn sanitize_name(name: &str, index: usize) -> String {
    let cleaned: String = name
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '_' { c } else { '_' })
        .collect();
    if cleaned.is_empty() || cleaned.starts_with(|c: char| c.is_ascii_digit()) {
        format!("v{index}_{cleaned}")
    } else {
        cleaned
    }
}

fn write_terms(out: &mut String, coeffs: &[f64], names: &[String]) {
    let mut any = false;
    for (c, name) in coeffs.iter().zip(names) {
        if *c == 0.0 {
            continue;
        }
        let sign = if *c < 0.0 { '-' } else { '+' };
        write!(out, " {sign} {} {name}", c.abs()).unwrap();
        any = true;
    }
    if !any {
        out.push_str(" 0");
    }
}

/// Result of solving a [`LinearProgram`].
#[derive(Debug, Clone, PartialEq)]
pub enum LpOutcome {
    Optimal {
        solution: Vec<f64>,
        objective: f64,
    },
    /// `witness` lists the tags of constraints carrying a nonzero Farkas
    /// multiplier; together with the untagged rows and bounds they are infeasible.
    Infeasible {
        witness: Vec<Tag>,
    },
    Unbounded,
}

impl LpOutcome {
    pub fn is_optimal(&self) -> bool {
        matches!(self, LpOutcome::Optimal { .. })
    }

    pub fn is_infeasible(&self) -> bool {
        matches!(self, LpOutcome::Infeasible { .. })
    }

    pub fn status_name(&self) -> &'static str {
        match self {
            LpOutcome::Optimal { .. } => "OPTIMAL",
            LpOutcome::Infeasible { .. } => "INFEASIBLE",
            LpOutcome::Unbounded => "UNBOUNDED",
        }
    }
}

/// An LP engine. [`DenseSimplex`] is the built-in reference implementation.
pub trait LpBackend: Send + Sync {
    fn solve(&self, lp: &LinearProgram, tol: f64) -> Result<LpOutcome>;

    fn is_feasible(&self, lp: &LinearProgram, tol: f64) -> Result<bool> {
        Ok(!self.solve(&lp.feasibility_only(), tol)?.is_infeasible())
    }
}

/// Solve with the built-in dense simplex.
pub fn solve(lp: &LinearProgram, tol: f64) -> Result<LpOutcome> {
    DenseSimplex::default().solve(lp, tol)
}
