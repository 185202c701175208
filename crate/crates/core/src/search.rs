//! The main verification loop.
//!
//! Each iteration infers forced phases by symbolic interval analysis, solves
//! the relaxed program under the current conditionings, then either reports a
//! witness, conditions one more neuron, or backtracks through an irreducible
//! inconsistent subset of the conditionings.

use std::collections::BTreeSet;
use std::io::Write;
use std::time::{Duration, Instant};

use ndarray::Array1;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::encoder::{
    default_ratio, encode, extract_candidate_input, indeterminate_neurons, layer_weights,
    ConditioningDecision, NeuronValue, Origin, RelaxedProgram, DEFAULT_WEIGHT_RANGE,
};
use crate::error::{Error, Result};
use crate::geometry::{
    sample_domain, sign_pattern_feasible, volume_fraction, HyperBox, Hyperplane, Polytope, Region,
    Side,
};
use crate::interval::{infer_phases, symbolic_analysis, Inference, PhaseMap};
use crate::lp::{self, extract_iis, LpOutcome, Tag};
use crate::network::{AffineMap, Network, NeuronId, Phase, PhaseLookup};
use crate::properties::VerificationQuery;

/// Tolerance used when checking witnesses.
pub const WITNESS_TOL: f64 = 1e-6;

/// How the next neuron is chosen within the shallowest indeterminate layer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum NeuronSelection {
    /// Smallest estimated activation-region volume.
    #[default]
    SmallestVolume,
    /// Uniformly random neuron and phase; a baseline.
    Random,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifierConfig {
    pub timeout: Duration,
    pub volume_samples: usize,
    pub lp_tol: f64,
    pub indeterminacy_tol: f64,
    /// Largest ratio between the heaviest and lightest objective weight.
    pub weight_ratio_cap: f64,
    pub seed: u64,
    pub max_lp_solves: u64,
    pub selection: NeuronSelection,
}

impl Default for VerifierConfig {
    fn default() -> Self {
        Self {
            timeout: Duration::from_secs(1200),
            volume_samples: 2000,
            lp_tol: lp::DEFAULT_TOL,
            indeterminacy_tol: 1e-6,
            weight_ratio_cap: DEFAULT_WEIGHT_RANGE,
            seed: 42,
            max_lp_solves: 1_000_000,
            selection: NeuronSelection::SmallestVolume,
        }
    }
}

impl VerifierConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = [self.lp_tol, self.indeterminacy_tol]
            .iter()
            .all(|v| v.is_finite() && *v > 0.0);
        if !positive
            || self.volume_samples == 0
            || self.max_lp_solves == 0
            || !(self.weight_ratio_cap >= 1.0 && self.weight_ratio_cap.is_finite())
        {
            return Err(Error::Value("verifier configuration values must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum UnknownReason {
    Timeout,
    Resource,
    Numeric,
}

impl std::fmt::Display for UnknownReason {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            UnknownReason::Timeout => "TIMEOUT",
            UnknownReason::Resource => "RESOURCE",
            UnknownReason::Numeric => "NUMERIC",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Verdict {
    Safe,
    /// `input` is in the ambient input space; `output` is the network output there.
    Unsafe { input: Array1<f64>, output: Array1<f64> },
    Unknown(UnknownReason),
}

impl Verdict {
    pub fn name(&self) -> &'static str {
        match self {
            Verdict::Safe => "SAFE",
            Verdict::Unsafe { .. } => "UNSAFE",
            Verdict::Unknown(_) => "UNKNOWN",
        }
    }

    pub fn is_safe(&self) -> bool {
        matches!(self, Verdict::Safe)
    }

    pub fn is_unsafe(&self) -> bool {
        matches!(self, Verdict::Unsafe { .. })
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct SearchStats {
    pub iterations: u64,
    /// Relaxed programs solved by the main loop.
    pub lp_solves: u64,
    /// Programs solved while extracting inconsistent subsystems.
    pub iis_solves: u64,
    /// Programs solved while pruning sign patterns.
    pub pruning_solves: u64,
    pub backtracks: u64,
    pub inferred_fixes: u64,
    pub max_depth: usize,
    /// Iterations right after a conditioning that produced an optimal solution.
    pub progress_checks: u64,
    /// Of those, iterations reporting an indeterminate neuron shallower than
    /// the neuron just conditioned.
    pub progress_violations: u64,
    /// Conditionings of a neuron shallower than the previous one.
    pub forced_repairs: u64,
    pub spurious_witnesses: u64,
    pub pruned_candidates: u64,
}

/// A conditioning on the search stack and the phases already tried for it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StackEntry {
    pub neuron: NeuronId,
    pub phase: Phase,
    pub tried: BTreeSet<Phase>,
}

impl StackEntry {
    pub fn new(neuron: NeuronId, phase: Phase) -> Self {
        Self { neuron, phase, tried: BTreeSet::from([phase]) }
    }

    pub fn decision(&self) -> ConditioningDecision {
        ConditioningDecision::search(self.neuron, self.phase)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Backtrack {
    Continue,
    Exhausted,
}

/// Revokes conditionings after an infeasible branch.
///
/// Entries deeper than `located` (the top entry when `None`) are dropped, then
/// the nearest entry with an untried phase is flipped; entries with no phase
/// left are dropped on the way.
pub fn backtrack(stack: &mut Vec<StackEntry>, located: Option<usize>) -> Backtrack {
    let keep = located.map_or(stack.len(), |i| (i + 1).min(stack.len()));
    stack.truncate(keep);
    while let Some(top) = stack.last_mut() {
        let other = top.phase.flipped();
        if !top.tried.contains(&other) {
            top.phase = other;
            top.tried.insert(other);
            return Backtrack::Continue;
        }
        stack.pop();
    }
    Backtrack::Exhausted
}

/// Deepest stack entry whose conditioning tag is in `iis`. Tags are stack
/// positions; `None` when the subsystem involves anything else.
fn locate(stack_len: usize, iis: &[Tag]) -> Option<usize> {
    if iis.iter().any(|t| t.0 as usize >= stack_len) {
        return None;
    }
    iis.iter().map(|t| t.0 as usize).max()
}

/// `x` lies in the input set and its output violates the property, within [`WITNESS_TOL`].
pub fn validate_witness(net: &Network, query: &VerificationQuery, x: &Array1<f64>) -> bool {
    query.is_violation(net, x.view(), WITNESS_TOL).unwrap_or(false)
}

/// One line of the search trace.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TraceEvent {
    pub iteration: u64,
    pub depth: usize,
    pub action: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lp_status: Option<&'static str>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub objective: Option<f64>,
    pub indeterminates: usize,
    pub inferred: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub neuron: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub phase: Option<Phase>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reason: Option<UnknownReason>,
    #[serde(skip_serializing_if = "std::ops::Not::not")]
    pub progress_violation: bool,
}

pub trait TraceSink {
    fn record(&mut self, event: &TraceEvent);
}

/// Collects events in memory.
#[derive(Debug, Default)]
pub struct VecTrace(pub Vec<TraceEvent>);

impl TraceSink for VecTrace {
    fn record(&mut self, event: &TraceEvent) {
        self.0.push(event.clone());
    }
}

/// Writes one JSON object per line. The first write error is kept and
/// later events are dropped.
pub struct JsonLinesTrace<W: Write> {
    out: W,
    error: Option<std::io::Error>,
}

impl<W: Write> JsonLinesTrace<W> {
    pub fn new(out: W) -> Self {
        Self { out, error: None }
    }

    pub fn finish(mut self) -> std::io::Result<W> {
        if let Some(e) = self.error.take() {
            return Err(e);
        }
        self.out.flush()?;
        Ok(self.out)
    }
}

impl<W: Write> TraceSink for JsonLinesTrace<W> {
    fn record(&mut self, event: &TraceEvent) {
        if self.error.is_some() {
            return;
        }
        let line = serde_json::to_string(event).expect("trace events serialize");
        if let Err(e) = writeln!(self.out, "{line}") {
            self.error = Some(e);
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerifyOutcome {
    pub verdict: Verdict,
    pub stats: SearchStats,
    pub elapsed: Duration,
}

/// Input samples with their pre-activations, drawn once per verification.
pub struct SampleSet {
    pub points: Vec<Array1<f64>>,
    preacts: Vec<Vec<Array1<f64>>>,
}

impl SampleSet {
    pub fn new(net: &Network, query: &VerificationQuery, points: Vec<Array1<f64>>) -> Result<Self> {
        let preacts = points
            .iter()
            .map(|x| Ok(net.forward(query.network_input(x.view())?.view())?.preacts))
            .collect::<Result<_>>()?;
        Ok(Self { points, preacts })
    }

    /// Samples whose true phases agree with `decided`; all samples when none do.
    pub fn consistent_with(&self, decided: &[(NeuronId, Phase)]) -> Vec<Array1<f64>> {
        let kept: Vec<Array1<f64>> = self
            .points
            .iter()
            .zip(&self.preacts)
            .filter(|(_, pre)| {
                decided.iter().all(|(id, phase)| {
                    let v = pre[id.layer][id.index];
                    match phase {
                        Phase::Active => v >= 0.0,
                        Phase::Inactive => v <= 0.0,
                    }
                })
            })
            .map(|(x, _)| x.clone())
            .collect();
        if kept.is_empty() {
            self.points.clone()
        } else {
            kept
        }
    }
}

/// Draws the shared volume samples. Polytopes whose rejection sampling
/// exhausts its cap fall back to their bounding-box samples that land inside,
/// or to the raw bounding-box samples when none do.
pub fn draw_samples(region: &Region, bbox: &HyperBox, count: usize, seed: u64) -> Result<Vec<Array1<f64>>> {
    match sample_domain(region, Some(bbox), count, seed) {
        Err(Error::SamplingFailed { .. }) => {
            let raw = sample_domain(&Region::Box(bbox.clone()), None, count, seed)?;
            let inside: Vec<Array1<f64>> = raw
                .iter()
                .filter(|x| region.contains(x.view(), 0.0).unwrap_or(false))
                .cloned()
                .collect();
            Ok(if inside.is_empty() { raw } else { inside })
        }
        other => other,
    }
}

/// Everything [`pick_neuron`] looks at.
pub struct PickContext<'a> {
    pub net: &'a Network,
    pub input_map: Option<&'a AffineMap>,
    /// Ambient input set as a polytope.
    pub domain: &'a Polytope,
    /// Decided and inferred phases.
    pub phases: &'a PhaseMap,
    /// LP values of every neuron in the current solution.
    pub values: &'a [NeuronValue],
    pub samples: &'a SampleSet,
    pub selection: NeuronSelection,
}

/// A chosen conditioning.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pick {
    pub neuron: NeuronId,
    pub phase: Phase,
    /// Candidates discarded by sign-pattern pruning.
    pub pruned: usize,
    /// Pruning programs solved.
    pub lp_solves: usize,
}

/// Chooses the next conditioning among the shallowest indeterminate layer.
///
/// Each candidate's boundary is mapped to input space through the phases of
/// the shallower layers. Candidate phases whose half-space is incompatible
/// with the same-layer decisions are pruned; the survivor with the smallest
/// sampled volume wins, ties going to the lower index and then to ACTIVE.
/// [`Error::NoCandidate`] is returned only when pruning is exact, i.e. every
/// shallower neuron has a decided or inferred phase.
pub fn pick_neuron(indets: &[NeuronValue], ctx: &PickContext<'_>, rng: &mut ChaCha8Rng) -> Result<Pick> {
    let layer = indets
        .iter()
        .map(|v| v.neuron.layer)
        .min()
        .ok_or(Error::NoCandidate)?;
    let lp_phase = |id: NeuronId| {
        ctx.values
            .iter()
            .find(|v| v.neuron == id)
            .map(NeuronValue::implied_phase)
    };
    let fold_phases = |id: NeuronId| ctx.phases.phase(id).or_else(|| lp_phase(id));
    let exact = ctx.phases.prefix_fixed(layer);
    let pre = ctx.net.preactivation_map(&fold_phases, layer)?;
    let pre = match ctx.input_map {
        Some(m) => AffineMap::compose(&pre, m)?,
        None => pre,
    };
    let plane = |j: usize| {
        let (row, offset) = pre.row(j);
        Hyperplane::new(row.to_owned(), offset)
    };

    let decided: Vec<(NeuronId, Phase)> = ctx.phases.decided();
    let same_layer: Vec<(Hyperplane, Side)> = decided
        .iter()
        .filter(|(id, _)| id.layer == layer)
        .map(|(id, p)| (plane(id.index), Side::from(*p)))
        .collect();

    let mut candidates: Vec<(NeuronId, Phase)> = indets
        .iter()
        .filter(|v| v.neuron.layer == layer)
        .flat_map(|v| [(v.neuron, Phase::Active), (v.neuron, Phase::Inactive)])
        .collect();
    match ctx.selection {
        NeuronSelection::SmallestVolume => {
            let samples = ctx.samples.consistent_with(&decided);
            let mut scored = Vec::with_capacity(candidates.len());
            for (id, phase) in candidates {
                let v = volume_fraction(&plane(id.index), Side::from(phase), &samples)?;
                scored.push((v, id, phase));
            }
            scored.sort_by(|a, b| {
                a.0.total_cmp(&b.0)
                    .then(a.1.index.cmp(&b.1.index))
                    .then(a.2.cmp(&b.2))
            });
            candidates = scored.into_iter().map(|(_, id, p)| (id, p)).collect();
        }
        NeuronSelection::Random => {
            candidates.shuffle(rng);
        }
    }

    let mut pruned = 0;
    let mut solves = 0;
    for &(id, phase) in &candidates {
        let mut pattern = same_layer.clone();
        pattern.push((plane(id.index), Side::from(phase)));
        solves += 1;
        if sign_pattern_feasible(&pattern, ctx.domain)? {
            return Ok(Pick { neuron: id, phase, pruned, lp_solves: solves });
        }
        pruned += 1;
    }
    if exact {
        return Err(Error::NoCandidate);
    }
    let (neuron, phase) = candidates[0];
    Ok(Pick { neuron, phase, pruned, lp_solves: solves })
}

struct Run<'a, 't> {
    net: &'a Network,
    query: &'a VerificationQuery,
    cfg: &'a VerifierConfig,
    trace: Option<&'t mut (dyn TraceSink + 't)>,
    stats: SearchStats,
    stack: Vec<StackEntry>,
    iteration: u64,
}

impl Run<'_, '_> {
    fn emit(&mut self, mut event: TraceEvent) {
        event.iteration = self.iteration;
        event.depth = self.stack.len();
        if let Some(t) = self.trace.as_deref_mut() {
            t.record(&event);
        }
    }

    fn event(action: &'static str) -> TraceEvent {
        TraceEvent {
            iteration: 0,
            depth: 0,
            action,
            lp_status: None,
            objective: None,
            indeterminates: 0,
            inferred: 0,
            neuron: None,
            phase: None,
            reason: None,
            progress_violation: false,
        }
    }

    fn back(&mut self, located: Option<usize>, event: TraceEvent) -> Backtrack {
        self.stats.backtracks += 1;
        let result = backtrack(&mut self.stack, located);
        self.emit(event);
        result
    }

    fn push(&mut self, neuron: NeuronId, phase: Phase) {
        self.stack.push(StackEntry::new(neuron, phase));
        self.stats.max_depth = self.stats.max_depth.max(self.stack.len());
    }

    fn last_conditioned_layer(&self) -> Option<usize> {
        self.stack.last().map(|e| e.neuron.layer)
    }
}

pub fn verify(net: &Network, query: &VerificationQuery, cfg: &VerifierConfig) -> Result<VerifyOutcome> {
    verify_traced(net, query, cfg, None)
}

pub fn verify_traced(
    net: &Network,
    query: &VerificationQuery,
    cfg: &VerifierConfig,
    trace: Option<&mut dyn TraceSink>,
) -> Result<VerifyOutcome> {
    let start = Instant::now();
    cfg.validate()?;
    query.validate(net)?;
    let mut run = Run {
        net,
        query,
        cfg,
        trace,
        stats: SearchStats::default(),
        stack: Vec::new(),
        iteration: 0,
    };
    let verdict = run_loop(&mut run, start)?;
    let mut event = Run::event(match verdict {
        Verdict::Safe => "safe",
        Verdict::Unsafe { .. } => "unsafe",
        Verdict::Unknown(_) => "unknown",
    });
    if let Verdict::Unknown(r) = &verdict {
        event.reason = Some(*r);
    }
    run.emit(event);
    Ok(VerifyOutcome {
        verdict,
        stats: run.stats,
        elapsed: start.elapsed(),
    })
}

fn run_loop(run: &mut Run<'_, '_>, start: Instant) -> Result<Verdict> {
    let (net, query, cfg) = (run.net, run.query, run.cfg);
    let domain = query.input_set.to_polytope();
    let bbox = match query.input_set.bounding_box() {
        Ok(b) => b,
        Err(Error::Domain(msg)) if msg.contains("empty") => return Ok(Verdict::Safe),
        Err(e) => return Err(e),
    };
    let samples = SampleSet::new(
        net,
        query,
        draw_samples(&query.input_set, &bbox, cfg.volume_samples, cfg.seed)?,
    )?;
    let n = net.relu_layer_count();
    let weights = layer_weights(n, default_ratio(n, cfg.weight_ratio_cap));
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0x9e37_79b9_7f4a_7c15);
    let mut just_conditioned = false;

    loop {
        if start.elapsed() > cfg.timeout {
            return Ok(Verdict::Unknown(UnknownReason::Timeout));
        }
        if run.stats.lp_solves >= cfg.max_lp_solves {
            return Ok(Verdict::Unknown(UnknownReason::Resource));
        }
        run.iteration += 1;
        run.stats.iterations += 1;

        let decided = PhaseMap::from_decisions(net, run.stack.iter().map(|e| (e.neuron, e.phase)))?;
        let bounds = symbolic_analysis(net, &bbox, query.input_map.as_ref(), &decided)?;
        let phases = match infer_phases(&bounds, &decided) {
            Inference::Consistent(m) => m,
            Inference::BranchInfeasible(id) => {
                let mut e = Run::event("branch_infeasible");
                e.neuron = Some(id.to_string());
                just_conditioned = false;
                if run.back(None, e) == Backtrack::Exhausted {
                    return Ok(Verdict::Safe);
                }
                continue;
            }
        };
        let inferred = phases.inferred();
        run.stats.inferred_fixes += inferred.len() as u64;
        let decisions: Vec<ConditioningDecision> = run
            .stack
            .iter()
            .map(StackEntry::decision)
            .chain(inferred.iter().map(|(id, p)| ConditioningDecision::inferred(*id, *p)))
            .collect();
        let prog = encode(net, query, &decisions, &weights)?;
        run.stats.lp_solves += 1;
        let outcome = match lp::solve(&prog.lp, cfg.lp_tol) {
            Ok(o) => o,
            Err(Error::Numeric(_)) => return Ok(Verdict::Unknown(UnknownReason::Numeric)),
            Err(e) => return Err(e),
        };
        let mut event = Run::event("");
        event.lp_status = Some(outcome.status_name());
        event.inferred = inferred.len();

        match outcome {
            LpOutcome::Unbounded => return Ok(Verdict::Unknown(UnknownReason::Numeric)),
            LpOutcome::Infeasible { .. } => {
                just_conditioned = false;
                if run.stack.is_empty() {
                    return Ok(Verdict::Safe);
                }
                let located = match iis_location(run, &prog) {
                    IisLocation::BaseInfeasible => return Ok(Verdict::Safe),
                    IisLocation::Entry(i) => Some(i),
                    IisLocation::Top => None,
                };
                event.action = "backtrack";
                if run.back(located, event) == Backtrack::Exhausted {
                    return Ok(Verdict::Safe);
                }
            }
            LpOutcome::Optimal { solution, objective } => {
                event.objective = Some(objective);
                let indets = indeterminate_neurons(&prog, &solution, cfg.indeterminacy_tol);
                event.indeterminates = indets.len();
                let last = run.last_conditioned_layer();
                if just_conditioned {
                    run.stats.progress_checks += 1;
                    if let (Some(d), Some(first)) = (last, indets.first()) {
                        if first.neuron.layer < d {
                            run.stats.progress_violations += 1;
                            event.progress_violation = true;
                        }
                    }
                }
                just_conditioned = false;

                if indets.is_empty() {
                    let x = extract_candidate_input(&prog, &solution);
                    if validate_witness(net, query, &x) {
                        let output = query.output_at(net, x.view())?;
                        return Ok(Verdict::Unsafe { input: x, output });
                    }
                    run.stats.spurious_witnesses += 1;
                    let values = prog.neuron_values(&solution);
                    let conditioned: BTreeSet<NeuronId> =
                        decisions.iter().map(|d| d.neuron).collect();
                    let worst = values
                        .iter()
                        .filter(|v| !conditioned.contains(&v.neuron))
                        .max_by(|a, b| a.residual().abs().total_cmp(&b.residual().abs()));
                    let Some(worst) = worst.copied() else {
                        return Ok(Verdict::Unknown(UnknownReason::Numeric));
                    };
                    run.push(worst.neuron, worst.implied_phase());
                    just_conditioned = true;
                    event.action = "spurious_repair";
                    event.neuron = Some(worst.neuron.to_string());
                    event.phase = Some(worst.implied_phase());
                    run.emit(event);
                    continue;
                }

                let values = prog.neuron_values(&solution);
                let ctx = PickContext {
                    net,
                    input_map: query.input_map.as_ref(),
                    domain: &domain,
                    phases: &phases,
                    values: &values,
                    samples: &samples,
                    selection: cfg.selection,
                };
                match pick_neuron(&indets, &ctx, &mut rng) {
                    Ok(pick) => {
                        run.stats.pruning_solves += pick.lp_solves as u64;
                        run.stats.pruned_candidates += pick.pruned as u64;
                        if last.is_some_and(|d| pick.neuron.layer < d) {
                            run.stats.forced_repairs += 1;
                        }
                        run.push(pick.neuron, pick.phase);
                        just_conditioned = true;
                        event.action = "condition";
                        event.neuron = Some(pick.neuron.to_string());
                        event.phase = Some(pick.phase);
                        run.emit(event);
                    }
                    Err(Error::NoCandidate) => {
                        event.action = "backtrack";
                        if run.stack.is_empty() || run.back(None, event) == Backtrack::Exhausted {
                            return Ok(Verdict::Safe);
                        }
                    }
                    Err(e) => return Err(e),
                }
            }
        }
    }
}

enum IisLocation {
    BaseInfeasible,
    Entry(usize),
    Top,
}

fn iis_location(run: &mut Run<'_, '_>, prog: &RelaxedProgram) -> IisLocation {
    let candidates: Vec<Tag> = prog
        .tags_with_origin(Origin::Search)
        .into_iter()
        .chain(prog.tags_with_origin(Origin::Inferred))
        .collect();
    run.stats.iis_solves += candidates.len() as u64 + 2;
    match extract_iis(&prog.lp, &candidates, run.cfg.lp_tol) {
        Ok(report) => match locate(run.stack.len(), &report.tags) {
            Some(i) => IisLocation::Entry(i),
            None => IisLocation::Top,
        },
        Err(Error::BaseInfeasible) => IisLocation::BaseInfeasible,
        Err(_) => IisLocation::Top,
    }
}
