use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use clap::{Args, Parser, Subcommand, ValueEnum};
use peregrine::network::{load_network, Network, NetworkFormat};
use peregrine::properties::argmax;
use peregrine::search::{NeuronSelection, VerifierConfig};

mod report;
mod suite;

/// Exit codes shared by every subcommand.
pub const EXIT_HOLDS: u8 = 0;
pub const EXIT_VIOLATED: u8 = 1;
pub const EXIT_UNKNOWN: u8 = 2;
pub const EXIT_ERROR: u8 = 3;

#[derive(Parser)]
#[command(name = "peregrine", version, about = "Sound and complete verification of ReLU networks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Decide a property file against a network.
    Verify(VerifyArgs),
    /// Evaluate a network on one input.
    Eval(EvalArgs),
    /// Compare the verifier with exhaustive enumeration on random instances.
    OracleSuite(suite::SuiteArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    Json,
    Text,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Selection {
    SmallestVolume,
    Random,
}

#[derive(Args, Clone)]
pub struct SearchFlags {
    /// Per-query time limit in seconds.
    #[arg(long, env = "PEREGRINE_TIMEOUT", default_value_t = 1200.0)]
    pub timeout: f64,
    /// Samples used to rank candidate phases by region volume.
    #[arg(long, env = "PEREGRINE_VOLUME_SAMPLES", default_value_t = 2000)]
    pub volume_samples: usize,
    #[arg(long, env = "PEREGRINE_LP_TOL", default_value_t = 1e-7)]
    pub lp_tol: f64,
    #[arg(long, env = "PEREGRINE_MAX_LP_SOLVES", default_value_t = 1_000_000)]
    pub max_lp_solves: u64,
    #[arg(long, env = "PEREGRINE_SELECTION", value_enum, default_value_t = Selection::SmallestVolume)]
    pub selection: Selection,
}

impl SearchFlags {
    pub fn config(&self, seed: u64) -> Result<VerifierConfig, String> {
        if !(self.timeout >= 0.0 && self.timeout.is_finite()) {
            return Err(format!("--timeout must be a non-negative number of seconds, got {}", self.timeout));
        }
        let cfg = VerifierConfig {
            timeout: Duration::from_secs_f64(self.timeout),
            volume_samples: self.volume_samples,
            lp_tol: self.lp_tol,
            seed,
            max_lp_solves: self.max_lp_solves,
            selection: match self.selection {
                Selection::SmallestVolume => NeuronSelection::SmallestVolume,
                Selection::Random => NeuronSelection::Random,
            },
            ..VerifierConfig::default()
        };
        cfg.validate().map_err(|e| e.to_string())?;
        Ok(cfg)
    }
}

#[derive(Args)]
pub struct VerifyArgs {
    #[arg(long, env = "PEREGRINE_NETWORK")]
    pub network: PathBuf,
    #[arg(long, env = "PEREGRINE_PROPERTY")]
    pub property: PathBuf,
    /// Seed for volume sampling and the random selection baseline.
    #[arg(long, env = "PEREGRINE_SEED", default_value_t = 42)]
    pub seed: u64,
    #[command(flatten)]
    pub search: SearchFlags,
    /// Worker threads; queries run in parallel, never a single query.
    #[arg(long, env = "PEREGRINE_JOBS", default_value_t = 1)]
    pub jobs: usize,
    #[arg(long, env = "PEREGRINE_OUTPUT", value_enum, default_value_t = OutputFormat::Json)]
    pub output: OutputFormat,
    /// Write the report here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Write the search trace as JSON lines.
    #[arg(long)]
    pub trace: Option<PathBuf>,
    /// Leave wall-clock times out of the report.
    #[arg(long, env = "PEREGRINE_NO_TIMESTAMPS")]
    pub no_timestamps: bool,
}

#[derive(Args)]
struct EvalArgs {
    #[arg(long, env = "PEREGRINE_NETWORK")]
    network: PathBuf,
    /// Comma-separated input values.
    #[arg(long, allow_hyphen_values = true)]
    input: String,
    #[arg(long, value_enum, default_value_t = OutputFormat::Text)]
    output: OutputFormat,
}

pub fn read_network(path: &Path) -> Result<Network, String> {
    let bytes = fs::read(path).map_err(|e| format!("cannot read {}: {e}", path.display()))?;
    load_network(&bytes, NetworkFormat::from_path(path)).map_err(|e| format!("{}: {e}", path.display()))
}

pub fn write_output(out: Option<&Path>, text: &str) -> Result<(), String> {
    match out {
        Some(p) => fs::write(p, text).map_err(|e| format!("cannot write {}: {e}", p.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn parse_vector(text: &str) -> Result<Vec<f64>, String> {
    text.split(',')
        .map(|s| s.trim().parse::<f64>().map_err(|e| format!("bad input value `{}`: {e}", s.trim())))
        .collect()
}

fn cmd_eval(args: &EvalArgs) -> Result<u8, String> {
    let net = read_network(&args.network)?;
    let x = ndarray::Array1::from(parse_vector(&args.input)?);
    let z = net.eval(x.view()).map_err(|e| e.to_string())?;
    let k = argmax(&z);
    let text = match args.output {
        OutputFormat::Json => {
            format!("{}\n", serde_json::json!({ "output": z.to_vec(), "argmax": k }))
        }
        OutputFormat::Text => {
            let values: Vec<String> = z.iter().map(f64::to_string).collect();
            format!("output: {}\nargmax: {k}\n", values.join(","))
        }
    };
    write_output(None, &text)?;
    Ok(EXIT_HOLDS)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_ERROR } else { EXIT_HOLDS });
        }
    };
    let result = match &cli.command {
        Command::Verify(args) => report::cmd_verify(args),
        Command::Eval(args) => cmd_eval(args),
        Command::OracleSuite(args) => suite::cmd_oracle_suite(args),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_ERROR)
        }
    }
}
