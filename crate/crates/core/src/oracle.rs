//! Exhaustive activation-pattern enumeration.
//!
//! Phases are fixed neuron by neuron, shallowest layer first, and every prefix
//! is kept only while its linear region is non-empty. On each leaf the network
//! is affine, so the query reduces to one LP in the ambient input. Exponential
//! in the worst case; meant for small networks and as a test oracle.

use ndarray::{Array1, ArrayView1};

use crate::error::Result;
use crate::lp::{self, Constraint, LinearProgram, LpOutcome, Sense, DEFAULT_TOL};
use crate::network::{AffineMap, Network, NeuronId, Phase};
use crate::properties::VerificationQuery;

#[derive(Debug, Clone, PartialEq)]
pub enum OracleVerdict {
    Safe,
    Unsafe(Array1<f64>),
}

impl OracleVerdict {
    pub fn is_safe(&self) -> bool {
        matches!(self, OracleVerdict::Safe)
    }
}

/// Counters from one enumeration.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct EnumerationStats {
    pub regions: usize,
    pub lp_solves: usize,
}

/// A non-empty linear region: the LP over `x` that describes it and the
/// affine map from `x` to the network output inside it.
pub struct LinearRegion<'a> {
    pub lp: &'a LinearProgram,
    pub output: &'a AffineMap,
    /// Phase of every ReLU neuron inside the region.
    pub phases: &'a [Vec<Phase>],
}

struct Enumerator<'a> {
    net: &'a Network,
    pre_map: AffineMap,
    stats: EnumerationStats,
}

impl Enumerator<'_> {
    fn feasible(&mut self, lp: &LinearProgram) -> Result<bool> {
        self.stats.lp_solves += 1;
        Ok(!lp::solve(lp, DEFAULT_TOL)?.is_infeasible())
    }

    fn lookup(phases: &[Vec<Phase>]) -> impl Fn(NeuronId) -> Option<Phase> + '_ {
        move |id: NeuronId| phases.get(id.layer).and_then(|r| r.get(id.index)).copied()
    }

    /// Returns `true` when `visit` asked to stop.
    fn layer<F>(&mut self, lp: &LinearProgram, phases: &mut Vec<Vec<Phase>>, visit: &mut F) -> Result<bool>
    where
        F: FnMut(LinearRegion<'_>) -> Result<bool>,
    {
        let l = phases.len();
        if l == self.net.relu_layer_count() {
            self.stats.regions += 1;
            let fold = self.net.fold_affine(&Self::lookup(phases), self.net.layers().len())?;
            let output = AffineMap::compose(&fold, &self.pre_map)?;
            return visit(LinearRegion { lp, output: &output, phases });
        }
        let pre = AffineMap::compose(
            &self.net.preactivation_map(&Self::lookup(phases), l)?,
            &self.pre_map,
        )?;
        phases.push(Vec::with_capacity(pre.output_dim()));
        let stop = self.neuron(lp, &pre, phases, visit)?;
        phases.pop();
        Ok(stop)
    }

    fn neuron<F>(
        &mut self,
        lp: &LinearProgram,
        pre: &AffineMap,
        phases: &mut Vec<Vec<Phase>>,
        visit: &mut F,
    ) -> Result<bool>
    where
        F: FnMut(LinearRegion<'_>) -> Result<bool>,
    {
        let j = phases.last().map_or(0, Vec::len);
        if j == pre.output_dim() {
            return self.layer(lp, phases, visit);
        }
        let (row, offset) = pre.row(j);
        for phase in [Phase::Active, Phase::Inactive] {
            let sense = match phase {
                Phase::Active => Sense::Ge,
                Phase::Inactive => Sense::Le,
            };
            let child = lp.with_constraints([Constraint::new(row.to_vec(), sense, -offset)])?;
            if !self.feasible(&child)? {
                continue;
            }
            phases.last_mut().expect("layer pushed").push(phase);
            let stop = self.neuron(&child, pre, phases, visit)?;
            phases.last_mut().expect("layer pushed").pop();
            if stop {
                return Ok(true);
            }
        }
        Ok(false)
    }
}

/// Calls `visit` on every non-empty linear region of the query's input set
/// until it returns `true`.
pub fn for_each_region<F>(net: &Network, query: &VerificationQuery, mut visit: F) -> Result<EnumerationStats>
where
    F: FnMut(LinearRegion<'_>) -> Result<bool>,
{
    query.validate(net)?;
    let d = query.ambient_dim();
    let pre_map = query
        .input_map
        .clone()
        .unwrap_or_else(|| AffineMap::identity(d));
    let mut base = LinearProgram::new();
    for i in 0..d {
        base.add_variable(format!("x{i}"), f64::NEG_INFINITY, f64::INFINITY);
    }
    for c in query.input_set.to_polytope().lp_rows(d, 0) {
        base.add_constraint(c)?;
    }
    let mut e = Enumerator {
        net,
        pre_map,
        stats: EnumerationStats::default(),
    };
    if e.feasible(&base)? {
        e.layer(&base, &mut Vec::new(), &mut visit)?;
    }
    Ok(e.stats)
}

/// Rows expressing `A z ≤ b` and the coupled constraints with `z = M x + m`.
fn output_rows(query: &VerificationQuery, output: &AffineMap) -> Vec<Constraint> {
    let (m, off) = (output.matrix(), output.offset());
    let vio = &query.violation_set;
    let mut rows: Vec<Constraint> = vio
        .a()
        .outer_iter()
        .zip(vio.b())
        .map(|(a, &b)| Constraint::new(a.dot(m).to_vec(), Sense::Le, b - a.dot(off)))
        .collect();
    for c in &query.coupled {
        let coeffs = &c.gx + &c.gz.dot(m);
        rows.push(Constraint::new(coeffs.to_vec(), Sense::Le, c.g - c.gz.dot(off)));
    }
    rows
}

/// Decides the query by enumeration.
pub fn exhaustive_verdict(net: &Network, query: &VerificationQuery) -> Result<(OracleVerdict, EnumerationStats)> {
    let mut verdict = OracleVerdict::Safe;
    let stats = for_each_region(net, query, |region| {
        let leaf = region.lp.with_constraints(output_rows(query, region.output))?;
        if let LpOutcome::Optimal { solution, .. } = lp::solve(&leaf, DEFAULT_TOL)? {
            verdict = OracleVerdict::Unsafe(Array1::from(solution));
            return Ok(true);
        }
        Ok(false)
    })?;
    Ok((verdict, stats))
}

/// Maximum of `c · z` over the query's input set (violation set ignored,
/// coupled constraints kept), with a maximizing input. `None` when the input
/// set is empty.
pub fn max_linear_output(
    net: &Network,
    query: &VerificationQuery,
    c: ArrayView1<f64>,
) -> Result<Option<(f64, Array1<f64>)>> {
    let mut unrestricted = query.clone();
    unrestricted.violation_set = crate::geometry::Polytope::whole_space(net.output_dim());
    let mut best: Option<(f64, Array1<f64>)> = None;
    for_each_region(net, &unrestricted, |region| {
        let mut leaf = region.lp.with_constraints(output_rows(&unrestricted, region.output))?;
        let obj = c.dot(region.output.matrix());
        leaf.set_objective(obj.mapv(|v| -v).to_vec())?;
        if let LpOutcome::Optimal { solution, .. } = lp::solve(&leaf, DEFAULT_TOL)? {
            let x = Array1::from(solution);
            let value = c.dot(&region.output.apply(x.view())?);
            if best.as_ref().is_none_or(|(b, _)| value > *b) {
                best = Some((value, x));
            }
        }
        Ok(false)
    })?;
    Ok(best)
}
