//! The `verify` subcommand and its report.

use std::fs;
use std::time::Instant;

use peregrine::network::Network;
use peregrine::properties::{robustness_queries, LabeledQuery, Property, RobustnessVerdict};
use peregrine::search::{
    validate_witness, verify_traced, TraceEvent, UnknownReason, VecTrace, Verdict, VerifierConfig, VerifyOutcome,
};
use rayon::prelude::*;
use serde::Serialize;

use crate::{read_network, write_output, OutputFormat, VerifyArgs, EXIT_HOLDS, EXIT_UNKNOWN, EXIT_VIOLATED};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Serialize)]
pub struct RunReport {
    pub schema: u32,
    pub kind: &'static str,
    pub network: String,
    pub property: String,
    pub verdict: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reason: Option<UnknownReason>,
    /// Class reached by a robustness witness.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub class: Option<usize>,
    pub config: ConfigRecord,
    pub queries: Vec<QueryRecord>,
    pub aggregate: Aggregate,
}

#[derive(Serialize)]
pub struct ConfigRecord {
    pub timeout_s: f64,
    pub seed: u64,
    pub volume_samples: usize,
    pub lp_tol: f64,
    pub max_lp_solves: u64,
    pub selection: peregrine::search::NeuronSelection,
}

#[derive(Serialize)]
pub struct Witness {
    pub input: Vec<f64>,
    pub output: Vec<f64>,
    pub valid: bool,
}

#[derive(Serialize)]
pub struct QueryRecord {
    pub id: String,
    pub verdict: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reason: Option<UnknownReason>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<Witness>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wall_time_s: Option<f64>,
    pub lp_solves: u64,
    pub backtracks: u64,
    pub inferred_fixes: u64,
    pub iterations: u64,
}

/// Totals in the shape of a time / proved-count table.
#[derive(Serialize)]
pub struct Aggregate {
    pub total: usize,
    pub safe: usize,
    #[serde(rename = "unsafe")]
    pub unsafe_: usize,
    pub unknown: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub total_time_s: Option<f64>,
}

struct QueryRun {
    outcome: VerifyOutcome,
    trace: Vec<TraceEvent>,
}

fn run_one(net: &Network, q: &LabeledQuery, cfg: &VerifierConfig, traced: bool) -> Result<QueryRun, String> {
    let mut sink = VecTrace::default();
    let trace = traced.then_some(&mut sink as &mut dyn peregrine::search::TraceSink);
    let mut outcome = verify_traced(net, &q.query, cfg, trace).map_err(|e| format!("{}: {e}", q.id))?;
    // re-check at print time; a witness that fails is not reported as one
    if let Verdict::Unsafe { input, .. } = &outcome.verdict {
        if !validate_witness(net, &q.query, input) {
            outcome.verdict = Verdict::Unknown(UnknownReason::Numeric);
        }
    }
    Ok(QueryRun { outcome, trace: sink.0 })
}

fn run_all(net: &Network, queries: &[LabeledQuery], cfg: &VerifierConfig, jobs: usize, traced: bool) -> Result<Vec<QueryRun>, String> {
    if jobs <= 1 {
        return queries.iter().map(|q| run_one(net, q, cfg, traced)).collect();
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| e.to_string())?;
    pool.install(|| queries.par_iter().map(|q| run_one(net, q, cfg, traced)).collect())
}

fn unknown_reason(v: &Verdict) -> Option<UnknownReason> {
    match v {
        Verdict::Unknown(r) => Some(*r),
        _ => None,
    }
}

pub fn cmd_verify(args: &VerifyArgs) -> Result<u8, String> {
    let cfg = args.search.config(args.seed)?;
    if args.jobs == 0 {
        return Err("--jobs must be at least 1".into());
    }
    let net = read_network(&args.network)?;
    let text = fs::read_to_string(&args.property)
        .map_err(|e| format!("cannot read {}: {e}", args.property.display()))?;
    let property = Property::from_json(&text, &net).map_err(|e| format!("{}: {e}", args.property.display()))?;
    let queries = property.queries().map_err(|e| e.to_string())?;

    let start = Instant::now();
    let runs = run_all(&net, &queries, &cfg, args.jobs, args.trace.is_some())?;
    let total_time = start.elapsed().as_secs_f64();

    if let Some(path) = &args.trace {
        let mut lines = String::new();
        for (q, run) in queries.iter().zip(&runs) {
            for event in &run.trace {
                let mut v = serde_json::to_value(event).map_err(|e| e.to_string())?;
                v["query"] = q.id.clone().into();
                lines.push_str(&v.to_string());
                lines.push('\n');
            }
        }
        fs::write(path, lines).map_err(|e| format!("cannot write {}: {e}", path.display()))?;
    }

    let (verdict, reason, class, code) = match &property {
        Property::Robustness(spec) => {
            let classes = robustness_queries(spec).map_err(|e| e.to_string())?;
            let v = RobustnessVerdict::aggregate(classes.iter().zip(&runs).map(|((m, _), r)| (*m, &r.outcome.verdict)));
            match v {
                RobustnessVerdict::Robust => ("ROBUST", None, None, EXIT_HOLDS),
                RobustnessVerdict::NotRobust { class, .. } => ("NOT_ROBUST", None, Some(class), EXIT_VIOLATED),
                RobustnessVerdict::Unknown(r) => ("UNKNOWN", Some(r), None, EXIT_UNKNOWN),
            }
        }
        _ => {
            let verdicts: Vec<&Verdict> = runs.iter().map(|r| &r.outcome.verdict).collect();
            if verdicts.iter().any(|v| v.is_unsafe()) {
                ("UNSAFE", None, None, EXIT_VIOLATED)
            } else if let Some(r) = verdicts.iter().find_map(|v| unknown_reason(v)) {
                ("UNKNOWN", Some(r), None, EXIT_UNKNOWN)
            } else {
                ("SAFE", None, None, EXIT_HOLDS)
            }
        }
    };

    let records: Vec<QueryRecord> = queries
        .iter()
        .zip(&runs)
        .map(|(q, run)| {
            let o = &run.outcome;
            QueryRecord {
                id: q.id.clone(),
                verdict: o.verdict.name(),
                reason: unknown_reason(&o.verdict),
                witness: match &o.verdict {
                    Verdict::Unsafe { input, output } => Some(Witness {
                        input: input.to_vec(),
                        output: output.to_vec(),
                        valid: validate_witness(&net, &q.query, input),
                    }),
                    _ => None,
                },
                wall_time_s: (!args.no_timestamps).then(|| o.elapsed.as_secs_f64()),
                lp_solves: o.stats.lp_solves,
                backtracks: o.stats.backtracks,
                inferred_fixes: o.stats.inferred_fixes,
                iterations: o.stats.iterations,
            }
        })
        .collect();
    let count = |name: &str| records.iter().filter(|r| r.verdict == name).count();
    let report = RunReport {
        schema: SCHEMA_VERSION,
        kind: property.kind(),
        network: args.network.display().to_string(),
        property: args.property.display().to_string(),
        verdict,
        reason,
        class,
        config: ConfigRecord {
            timeout_s: args.search.timeout,
            seed: cfg.seed,
            volume_samples: cfg.volume_samples,
            lp_tol: cfg.lp_tol,
            max_lp_solves: cfg.max_lp_solves,
            selection: cfg.selection,
        },
        aggregate: Aggregate {
            total: records.len(),
            safe: count("SAFE"),
            unsafe_: count("UNSAFE"),
            unknown: count("UNKNOWN"),
            total_time_s: (!args.no_timestamps).then_some(total_time),
        },
        queries: records,
    };
    let text = match args.output {
        OutputFormat::Json => format!("{}\n", serde_json::to_string_pretty(&report).map_err(|e| e.to_string())?),
        OutputFormat::Text => render_text(&report),
    };
    write_output(args.out.as_deref(), &text)?;
    Ok(code)
}

fn join(v: &[f64]) -> String {
    v.iter().map(f64::to_string).collect::<Vec<_>>().join(", ")
}

fn render_text(r: &RunReport) -> String {
    let mut out = String::new();
    for q in &r.queries {
        out.push_str(&format!("{:<24} {}", q.id, q.verdict));
        if let Some(reason) = q.reason {
            out.push_str(&format!(" ({reason})"));
        }
        out.push_str(&format!("  lp solves {}  backtracks {}", q.lp_solves, q.backtracks));
        if let Some(t) = q.wall_time_s {
            out.push_str(&format!("  {t:.3} s"));
        }
        out.push('\n');
        if let Some(w) = &q.witness {
            out.push_str(&format!("    input  [{}]\n    output [{}]\n", join(&w.input), join(&w.output)));
        }
    }
    out.push_str(&format!("verdict: {}", r.verdict));
    if let Some(reason) = r.reason {
        out.push_str(&format!(" ({reason})"));
    }
    if let Some(c) = r.class {
        out.push_str(&format!(" (class {c})"));
    }
    let a = &r.aggregate;
    out.push_str(&format!(
        "\ntotal {}  safe {}  unsafe {}  unknown {}",
        a.total, a.safe, a.unsafe_, a.unknown
    ));
    if let Some(t) = a.total_time_s {
        out.push_str(&format!("  time {t:.3} s"));
    }
    out.push('\n');
    out
}
