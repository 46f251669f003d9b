//! The `weyllab` command-line front end.
//!
//! Every run produces one report: JSON by default, or the run's table as CSV
//! with `--format csv`. Exit status is 0 on success, 1 when a numerical
//! check fails (or the computation itself fails) and 2 on usage errors.

mod args;
mod commands;

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::error::{Result, WeylError};
pub use args::{BcArg, ComplexArg, Interval, ModeArg, RouteArg, Schedule};

pub const EXIT_OK: u8 = 0;
pub const EXIT_CHECK_FAILED: u8 = 1;
pub const EXIT_USAGE: u8 = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Parser, Serialize)]
#[command(
    name = "weyllab",
    version,
    about = "Spectral measures, m-functions, trace formulas and A-function inversion"
)]
pub struct Cli {
    /// Seed for every random choice (ChaCha8).
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Worker threads for parallel sweeps (default: logical cores).
    #[arg(long, global = true, env = "WEYLLAB_THREADS")]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Command {
    /// Jacobi operators: spectral measures and coefficient stripping.
    Jacobi {
        #[command(subcommand)]
        cmd: commands::JacobiCmd,
    },
    /// Rank-one perturbations and the infinite-coupling limit.
    Rankone {
        #[command(subcommand)]
        cmd: commands::RankoneCmd,
    },
    /// One-dimensional Schrödinger operators.
    Schrod {
        #[command(subcommand)]
        cmd: commands::SchrodCmd,
    },
    /// Spectral shift functions and trace formulas.
    Xi {
        #[command(subcommand)]
        cmd: commands::XiCmd,
    },
    /// The A-function: forward and inverse maps, fits and uniqueness checks.
    Afunc {
        #[command(subcommand)]
        cmd: commands::AfuncCmd,
    },
}

/// Pass/fail outcome of the check a command carries.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Verdict {
    pub passed: bool,
    pub check: String,
    pub value: f64,
    pub threshold: f64,
}

/// Plot-ready columns emitted with `--format csv`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Table {
    pub headers: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn new(headers: &[&str]) -> Self {
        Table {
            headers: headers.iter().map(|h| h.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        debug_assert_eq!(row.len(), self.headers.len());
        self.rows.push(row);
    }

    fn to_csv(&self) -> Result<Vec<u8>> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let err = |e: csv::Error| WeylError::InternalConsistency(format!("csv encoding: {e}"));
        w.write_record(&self.headers).map_err(err)?;
        for row in &self.rows {
            w.write_record(row.iter().map(|v| format!("{v:e}"))).map_err(err)?;
        }
        w.into_inner()
            .map_err(|e| WeylError::InternalConsistency(format!("csv encoding: {e}")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InputDigest {
    pub path: String,
    pub sha256: String,
}

/// Files read during a run, with their digests.
#[derive(Debug, Default)]
pub struct Inputs {
    digests: Vec<InputDigest>,
}

impl Inputs {
    pub fn read(&mut self, path: &Path) -> Result<String> {
        let bytes = std::fs::read(path).map_err(|source| WeylError::Io {
            path: path.display().to_string(),
            source,
        })?;
        let digest = Sha256::digest(&bytes);
        self.digests.push(InputDigest {
            path: path.display().to_string(),
            sha256: digest.iter().map(|b| format!("{b:02x}")).collect(),
        });
        String::from_utf8(bytes).map_err(|e| WeylError::Parse {
            path: path.display().to_string(),
            line: 0,
            msg: format!("not UTF-8: {e}"),
        })
    }
}

/// What a command hands back for the report.
#[derive(Debug, Default)]
pub struct Outcome {
    pub result: Value,
    pub table: Option<Table>,
    pub verdict: Option<Verdict>,
    pub conventions: Vec<(&'static str, String)>,
}

#[derive(Serialize)]
struct Report<'a> {
    command: String,
    config: &'a Cli,
    inputs: Vec<InputDigest>,
    conventions: serde_json::Map<String, Value>,
    result: Value,
    verdict: Option<Verdict>,
    metadata: Metadata,
}

#[derive(Serialize)]
struct Metadata {
    tool: &'static str,
    version: &'static str,
}

fn command_name(cmd: &Command) -> String {
    let v = serde_json::to_value(cmd).unwrap_or(Value::Null);
    let mut parts = Vec::new();
    let mut cur = &v;
    // Externally tagged enums: {"jacobi": {"cmd": {"roundtrip": {...}}}}.
    while let Value::Object(map) = cur {
        let Some((k, inner)) = map.iter().next() else { break };
        if map.len() != 1 {
            break;
        }
        if k != "cmd" {
            parts.push(k.clone());
        }
        cur = inner;
    }
    parts.join(" ")
}

fn render(cli: &Cli, outcome: Outcome, inputs: Inputs) -> Result<Vec<u8>> {
    match cli.format {
        Format::Csv => match &outcome.table {
            Some(t) => t.to_csv(),
            None => Err(WeylError::config("this command has no tabular output; use --format json")),
        },
        Format::Json => {
            let mut conventions = serde_json::Map::new();
            for (k, v) in outcome.conventions {
                conventions.insert(k.to_string(), Value::String(v));
            }
            let report = Report {
                command: command_name(&cli.command),
                config: cli,
                inputs: inputs.digests,
                conventions,
                result: outcome.result,
                verdict: outcome.verdict,
                metadata: Metadata {
                    tool: "weyllab",
                    version: env!("CARGO_PKG_VERSION"),
                },
            };
            let mut bytes = serde_json::to_vec_pretty(&report)
                .map_err(|e| WeylError::InternalConsistency(format!("json encoding: {e}")))?;
            bytes.push(b'\n');
            Ok(bytes)
        }
    }
}

/// Write through a sibling temporary file so a failed run leaves nothing
/// behind.
fn write_output(path: Option<&Path>, bytes: &[u8]) -> Result<()> {
    match path {
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(bytes)
                .and_then(|_| out.flush())
                .map_err(|source| WeylError::Io {
                    path: "<stdout>".into(),
                    source,
                })
        }
        Some(p) => {
            let io = |source| WeylError::Io {
                path: p.display().to_string(),
                source,
            };
            let mut tmp = p.as_os_str().to_owned();
            tmp.push(".partial");
            let tmp = PathBuf::from(tmp);
            std::fs::write(&tmp, bytes).map_err(io)?;
            std::fs::rename(&tmp, p).map_err(|e| {
                let _ = std::fs::remove_file(&tmp);
                io(e)
            })
        }
    }
}

fn exit_code_for(e: &WeylError) -> u8 {
    if e.is_usage() || matches!(e, WeylError::Domain(_)) {
        EXIT_USAGE
    } else {
        EXIT_CHECK_FAILED
    }
}

/// Run a parsed command line; returns the process exit status.
pub fn run(cli: &Cli) -> u8 {
    if let Some(n) = cli.threads {
        if n == 0 {
            eprintln!("error: --threads must be at least 1");
            return EXIT_USAGE;
        }
        // A pool that already exists (e.g. a second run in-process) is kept.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    let mut inputs = Inputs::default();
    let outcome = match commands::dispatch(&cli.command, cli.seed, &mut inputs) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {e}");
            return exit_code_for(&e);
        }
    };
    let failed = outcome.verdict.as_ref().is_some_and(|v| !v.passed);
    let bytes = match render(cli, outcome, inputs) {
        Ok(b) => b,
        Err(e) => {
            eprintln!("error: {e}");
            return exit_code_for(&e);
        }
    };
    if let Err(e) = write_output(cli.out.as_deref(), &bytes) {
        eprintln!("error: {e}");
        return EXIT_USAGE;
    }
    if failed {
        eprintln!("check failed");
        EXIT_CHECK_FAILED
    } else {
        EXIT_OK
    }
}

/// Parse `std::env::args` and run.
pub fn main_entry() -> u8 {
    main_from(std::env::args_os())
}

pub fn main_from<I, T>(argv: I) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    match Cli::try_parse_from(argv) {
        Ok(cli) => run(&cli),
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            code
        }
    }
}
