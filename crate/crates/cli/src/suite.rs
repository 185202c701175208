//! The `oracle-suite` subcommand.

use std::fs;
use std::path::PathBuf;
use std::time::Instant;

use clap::Args;
use peregrine::generate::{random_instance, Instance, InstanceParams, Intended};
use peregrine::oracle::{exhaustive_verdict, OracleVerdict};
use peregrine::search::{validate_witness, verify, SearchStats, Verdict, VerifierConfig};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::{write_output, OutputFormat, SearchFlags, EXIT_HOLDS, EXIT_VIOLATED};

#[derive(Args)]
pub struct SuiteArgs {
    #[arg(long, env = "PEREGRINE_SUITE_COUNT", default_value_t = 200)]
    count: usize,
    #[arg(long, default_value_t = 3)]
    max_layers: usize,
    #[arg(long, default_value_t = 6)]
    max_width: usize,
    /// Largest input dimension.
    #[arg(long, default_value_t = 3)]
    dim: usize,
    /// Instance `i` is drawn with `seed + i`; the verifier uses `seed`.
    #[arg(long = "seed", env = "PEREGRINE_SEED", default_value_t = 0)]
    suite_seed: u64,
    #[command(flatten)]
    search: SearchFlags,
    #[arg(long, env = "PEREGRINE_JOBS", default_value_t = 1)]
    jobs: usize,
    /// Where disagreeing instances are written.
    #[arg(long, default_value = "oracle-mismatches")]
    fixture_dir: PathBuf,
    #[arg(long, value_enum, default_value_t = OutputFormat::Text)]
    output: OutputFormat,
    /// Harness self-test: report the opposite verdict for the first instance.
    #[arg(long, hide = true)]
    inject_mismatch: bool,
}

#[derive(Serialize)]
struct Mismatch {
    instance: usize,
    verifier: &'static str,
    oracle: &'static str,
    fixture: String,
}

#[derive(Serialize)]
struct SuiteReport {
    schema: u32,
    count: usize,
    agreements: usize,
    agreement_rate: f64,
    safe: usize,
    #[serde(rename = "unsafe")]
    unsafe_: usize,
    invalid_witnesses: usize,
    lp_solves: u64,
    progress_checks: u64,
    progress_violations: u64,
    mismatches: Vec<Mismatch>,
}

struct Trial {
    instance: Instance,
    verdict: Verdict,
    oracle: OracleVerdict,
    stats: SearchStats,
}

fn trial(i: usize, args: &SuiteArgs, params: &InstanceParams, cfg: &VerifierConfig) -> Result<Trial, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(args.suite_seed.wrapping_add(i as u64));
    let intended = if i % 2 == 0 { Intended::Safe } else { Intended::Unsafe };
    let instance = random_instance(&mut rng, params, intended).map_err(|e| format!("instance {i}: {e}"))?;
    let out = verify(&instance.net, &instance.query, cfg).map_err(|e| format!("instance {i}: {e}"))?;
    let (oracle, _) = exhaustive_verdict(&instance.net, &instance.query).map_err(|e| format!("instance {i}: {e}"))?;
    let mut verdict = out.verdict;
    if args.inject_mismatch && i == 0 {
        verdict = match verdict {
            Verdict::Safe => Verdict::Unknown(peregrine::search::UnknownReason::Numeric),
            _ => Verdict::Safe,
        };
    }
    Ok(Trial { instance, verdict, oracle, stats: out.stats })
}

fn oracle_name(v: &OracleVerdict) -> &'static str {
    match v {
        OracleVerdict::Safe => "SAFE",
        OracleVerdict::Unsafe(_) => "UNSAFE",
    }
}

pub fn cmd_oracle_suite(args: &SuiteArgs) -> Result<u8, String> {
    let cfg = args.search.config(args.suite_seed)?;
    if args.max_layers == 0 || args.max_width == 0 || args.dim == 0 {
        return Err("--max-layers, --max-width and --dim must be positive".into());
    }
    let params = InstanceParams {
        max_layers: args.max_layers,
        max_width: args.max_width,
        max_dim: args.dim,
        ..InstanceParams::default()
    };
    let start = Instant::now();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(args.jobs.max(1))
        .build()
        .map_err(|e| e.to_string())?;
    let trials: Vec<Trial> = pool.install(|| {
        (0..args.count)
            .into_par_iter()
            .map(|i| trial(i, args, &params, &cfg))
            .collect::<Result<_, _>>()
    })?;

    let mut report = SuiteReport {
        schema: crate::report::SCHEMA_VERSION,
        count: args.count,
        agreements: 0,
        agreement_rate: 1.0,
        safe: 0,
        unsafe_: 0,
        invalid_witnesses: 0,
        lp_solves: 0,
        progress_checks: 0,
        progress_violations: 0,
        mismatches: Vec::new(),
    };
    for (i, t) in trials.iter().enumerate() {
        report.lp_solves += t.stats.lp_solves;
        report.progress_checks += t.stats.progress_checks;
        report.progress_violations += t.stats.progress_violations;
        let agree = match (&t.verdict, &t.oracle) {
            (Verdict::Safe, OracleVerdict::Safe) => {
                report.safe += 1;
                true
            }
            (Verdict::Unsafe { input, .. }, OracleVerdict::Unsafe(_)) => {
                report.unsafe_ += 1;
                let valid = validate_witness(&t.instance.net, &t.instance.query, input);
                report.invalid_witnesses += usize::from(!valid);
                valid
            }
            _ => false,
        };
        if agree {
            report.agreements += 1;
            continue;
        }
        fs::create_dir_all(&args.fixture_dir)
            .map_err(|e| format!("cannot create {}: {e}", args.fixture_dir.display()))?;
        let path = args.fixture_dir.join(format!("mismatch-{}-{i}.json", args.suite_seed));
        let mut property = serde_json::to_value(&t.instance.query).map_err(|e| e.to_string())?;
        property["type"] = "raw".into();
        let fixture = serde_json::json!({
            "network": t.instance.net.to_json(),
            "property": property,
            "verifier": t.verdict.name(),
            "oracle": oracle_name(&t.oracle),
        });
        fs::write(&path, format!("{fixture:#}\n")).map_err(|e| format!("cannot write {}: {e}", path.display()))?;
        report.mismatches.push(Mismatch {
            instance: i,
            verifier: t.verdict.name(),
            oracle: oracle_name(&t.oracle),
            fixture: path.display().to_string(),
        });
    }
    if args.count > 0 {
        report.agreement_rate = report.agreements as f64 / args.count as f64;
    }

    let text = match args.output {
        OutputFormat::Json => format!("{}\n", serde_json::to_string_pretty(&report).map_err(|e| e.to_string())?),
        OutputFormat::Text => {
            let mut s = format!(
                "{} instances, {} agree ({:.1}%), {} safe, {} unsafe, {} LP solves, {:.1} s\n",
                report.count,
                report.agreements,
                100.0 * report.agreement_rate,
                report.safe,
                report.unsafe_,
                report.lp_solves,
                start.elapsed().as_secs_f64()
            );
            s.push_str(&format!(
                "depth progress: {} of {} post-conditioning iterations had a shallower indeterminate neuron\n",
                report.progress_violations, report.progress_checks
            ));
            for m in &report.mismatches {
                s.push_str(&format!(
                    "mismatch on instance {}: verifier {}, oracle {}, fixture {}\n",
                    m.instance, m.verifier, m.oracle, m.fixture
                ));
            }
            s
        }
    };
    write_output(None, &text)?;
    Ok(if report.mismatches.is_empty() { EXIT_HOLDS } else { EXIT_VIOLATED })
}
