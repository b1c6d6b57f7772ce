//! The `probekit` command line.
//!
//! Exit status is 0 on success, 1 when a command ran but something failed
//! (a model error, an unreadable file) and 2 for usage errors (bad flags,
//! bad config, impossible regimes). Outputs already written are kept when a
//! later step fails; `MANIFEST.json` lists them together with the failures.

use std::path::PathBuf;
use std::time::Duration;

use clap::{Args, Parser, Subcommand};
use serde_json::Value;

use crate::bridge::ModelSpec;
use crate::error::{Error, Result};

mod bench;
pub mod config;
mod output;
mod parity;
mod probe1d;
mod probe2d;
mod serve;

pub use config::FileConfig;
pub use output::{Failure, Output, MANIFEST};
pub use parity::evaluate_parity;

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

/// Environment variable naming the default output directory.
pub const OUT_ENV: &str = "PROBEKIT_OUT";
pub const DEFAULT_OUT: &str = "probekit-out";

#[derive(Debug, Parser)]
#[command(name = "probekit", version, about = "Behavioral probes for in-context tabular classifiers")]
pub struct Cli {
    #[command(flatten)]
    pub common: CommonArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Default, Args)]
pub struct CommonArgs {
    /// Base seed for every random choice.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads (default: one per core).
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    /// Output directory [default: $PROBEKIT_OUT, else ./probekit-out].
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// TOML config file; flags override its values.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Model to run: a built-in ("1nn", "distance-softmax,shape=neg_linear"),
    /// "cmd:COMMAND" or "tcp:HOST:PORT". Repeatable.
    #[arg(long = "model", global = true)]
    pub models: Vec<String>,
    /// Per-request timeout for external models, in seconds.
    #[arg(long, global = true)]
    pub timeout: Option<f64>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// 1d probability-curve probes.
    Probe1d(probe1d::Probe1dArgs),
    /// 2d decision maps against the nearest-neighbour oracle.
    Probe2d(probe2d::Probe2dArgs),
    /// Exhaustive leave-one-out folds on parity truth tables.
    Parity(parity::ParityArgs),
    /// Split-based evaluation on a CSV or IDX dataset.
    Bench(bench::BenchArgs),
    /// Handshake with an external model and run a two-row smoke request.
    ServeCheck,
    /// Serve a built-in model over the wire protocol (stdio unless --tcp).
    Serve(serve::ServeArgs),
}

/// Settings shared by every command after merging flags, file and defaults.
#[derive(Debug, Clone)]
pub struct Common {
    pub seed: u64,
    pub jobs: Option<usize>,
    pub out: PathBuf,
    pub models: Vec<ModelSpec>,
    pub model_strings: Vec<String>,
    pub timeout: Option<Duration>,
    pub file: FileConfig,
}

impl Common {
    pub fn resolve(args: &CommonArgs, default_models: &[&str]) -> Result<Self> {
        let file = match &args.config {
            Some(p) => FileConfig::load(p)?,
            None => FileConfig::default(),
        };
        let out = args
            .out
            .clone()
            .or_else(|| file.out.clone())
            .or_else(|| std::env::var_os(OUT_ENV).map(PathBuf::from))
            .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT));
        let model_strings: Vec<String> = if !args.models.is_empty() {
            args.models.clone()
        } else if let Some(m) = &file.models {
            m.clone()
        } else {
            default_models.iter().map(|s| s.to_string()).collect()
        };
        if model_strings.is_empty() {
            return Err(Error::Config("at least one model is required".into()));
        }
        let timeout = match args.timeout.or(file.timeout_secs) {
            Some(t) if t > 0.0 && t.is_finite() => Some(Duration::from_secs_f64(t)),
            Some(t) => return Err(Error::Config(format!("timeout must be positive, got {t}"))),
            None => None,
        };
        let mut models = Vec::new();
        for s in &model_strings {
            let mut spec = ModelSpec::parse(s)?;
            if let Some(t) = timeout {
                spec.set_timeout(t);
            }
            if models.iter().any(|m: &ModelSpec| m.label == spec.label) {
                return Err(Error::Config(format!("model {s:?} given twice")));
            }
            models.push(spec);
        }
        let jobs = args.jobs.or(file.jobs);
        if jobs == Some(0) {
            return Err(Error::Config("--jobs must be at least 1".into()));
        }
        Ok(Common {
            seed: args.seed.or(file.seed).unwrap_or(0),
            jobs,
            out,
            models,
            model_strings,
            timeout,
            file,
        })
    }

    fn base_json(&self) -> serde_json::Map<String, Value> {
        let mut m = serde_json::Map::new();
        m.insert("seed".into(), Value::from(self.seed));
        m.insert("models".into(), Value::from(self.model_strings.clone()));
        m
    }
}

/// Exit status for an error that ended a command.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Config(_) | Error::Regime(_) => EXIT_USAGE,
        _ => EXIT_FAILURE,
    }
}

fn with_pool<T: Send>(jobs: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(j) = jobs {
        builder = builder.num_threads(j);
    }
    let pool = builder.build().map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    Ok(pool.install(f))
}

/// Runs a parsed command line and returns the exit status.
pub fn run(cli: Cli) -> i32 {
    let result = match cli.command {
        Command::Probe1d(a) => probe1d::run(&cli.common, &a),
        Command::Probe2d(a) => probe2d::run(&cli.common, &a),
        Command::Parity(a) => parity::run(&cli.common, &a),
        Command::Bench(a) => bench::run(&cli.common, &a),
        Command::ServeCheck => serve::run_check(&cli.common),
        Command::Serve(a) => serve::run_serve(&cli.common, &a),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("probekit: {e}");
            exit_code(&e)
        }
    }
}

/// Parses `args` (including the program name) and runs the command.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    match Cli::try_parse_from(args) {
        Ok(cli) => run(cli),
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            code
        }
    }
}

/// Finishes a command: writes the manifest and maps failures to the exit code.
fn finish(out: &Output, command: &str, config: serde_json::Map<String, Value>) -> Result<i32> {
    out.finish(command, &Value::Object(config))?;
    Ok(if out.n_failures() > 0 { EXIT_FAILURE } else { EXIT_OK })
}

/// `{:.8}` with negative zero normalised, for probability tables.
fn fmt_prob(v: f64) -> String {
    let s = format!("{v:.8}");
    if s.starts_with('-') && s[1..].bytes().all(|b| b == b'0' || b == b'.') {
        s[1..].to_string()
    } else {
        s
    }
}

fn csv_text(header: &[String], rows: &[Vec<String>]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).expect("in-memory write");
    for r in rows {
        w.write_record(r).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 csv")
}
