//! `chiralmol`: sweeps over the three-atom giant-molecule model, written as
//! CSV or JSON files.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;
mod config;
mod table;

use std::path::PathBuf;
use std::process::ExitCode;

use chiralmol_core::Error;
use clap::{Args, Parser, Subcommand, ValueEnum};

use commands::{CommandKind, Output};
use config::RunConfig;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("output error: {0}")]
    Output(String),
    #[error(transparent)]
    Core(#[from] Error),
    /// Search failed; the best-effort record is still written.
    #[error("search did not find an acceptable point")]
    NotFound(serde_json::Value),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) | CliError::Output(_) | CliError::Core(Error::Validation(_)) => 2,
            CliError::NotFound(_) | CliError::Core(Error::NotFound(_)) => 3,
            CliError::Core(_) => 4,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Parser, Debug)]
#[command(name = "chiralmol", version, about = "Spectra, dynamics, chirality maps and readout sweeps")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Eigenvalues, decay rates and dark flags of the effective Hamiltonian
    Spectrum(RunArgs),
    /// Time evolution of an initial state, optionally with a modulated detuning
    Evolve(RunArgs),
    /// Maximum chirality over a (delta, phi) grid
    ChiralityMap(RunArgs),
    /// Photon amplitudes emitted by a phase-shifted logical state
    Wavepackets(RunArgs),
    /// Readout error over (dtheta, ddelta) deviations from an operating point
    ErrorMap(RunArgs),
    /// Perfect-chirality search or readout-protocol optimization
    Optimize(RunArgs),
    /// Drive synthesis for a logical gate
    GateCalibrate(RunArgs),
}

#[derive(Args, Debug)]
struct RunArgs {
    /// Flat key=value config file
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output file
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// Worker threads for grid sweeps (default: all cores)
    #[arg(long)]
    threads: Option<usize>,
    /// Per-key overrides, `--key value` or `--key=value`
    #[arg(allow_hyphen_values = true, num_args = 0.., value_name = "--KEY VALUE")]
    overrides: Vec<String>,
}

impl Command {
    fn split(self) -> (CommandKind, RunArgs) {
        match self {
            Command::Spectrum(a) => (CommandKind::Spectrum, a),
            Command::Evolve(a) => (CommandKind::Evolve, a),
            Command::ChiralityMap(a) => (CommandKind::ChiralityMap, a),
            Command::Wavepackets(a) => (CommandKind::Wavepackets, a),
            Command::ErrorMap(a) => (CommandKind::ErrorMap, a),
            Command::Optimize(a) => (CommandKind::Optimize, a),
            Command::GateCalibrate(a) => (CommandKind::GateCalibrate, a),
        }
    }
}

/// Pairs up `--key value` tokens. The reserved flags may also appear here,
/// since clap hands over everything after the first unknown flag.
fn parse_overrides(args: &mut RunArgs) -> Result<Vec<(String, String)>, CliError> {
    let tokens = std::mem::take(&mut args.overrides);
    let mut pairs = Vec::new();
    let mut it = tokens.into_iter();
    while let Some(tok) = it.next() {
        let Some(flag) = tok.strip_prefix("--") else {
            return Err(CliError::Config(format!("expected --key, got {tok:?}")));
        };
        let (key, value) = match flag.split_once('=') {
            Some((k, v)) => (k.to_string(), v.to_string()),
            None => {
                let v = it
                    .next()
                    .ok_or_else(|| CliError::Config(format!("--{flag} needs a value")))?;
                (flag.to_string(), v)
            }
        };
        match key.as_str() {
            "config" => args.config = Some(value.into()),
            "out" => args.out = Some(value.into()),
            "format" => {
                args.format = Some(
                    Format::from_str(&value, true)
                        .map_err(|_| CliError::Config(format!("--format must be csv or json, got {value:?}")))?,
                )
            }
            "threads" => {
                args.threads = Some(
                    value
                        .parse()
                        .map_err(|_| CliError::Config(format!("--threads needs a positive integer, got {value:?}")))?,
                )
            }
            _ => pairs.push((key, value)),
        }
    }
    Ok(pairs)
}

fn run(kind: CommandKind, mut args: RunArgs) -> Result<usize, CliError> {
    let overrides = parse_overrides(&mut args)?;
    let out = args
        .out
        .clone()
        .ok_or_else(|| CliError::Config("--out PATH is required".into()))?;
    let format = args
        .format
        .unwrap_or(if kind.default_json() { Format::Json } else { Format::Csv });
    if kind.default_json() && format == Format::Csv {
        return Err(CliError::Config(format!("{} writes JSON only", kind.name())));
    }
    if let Some(n) = args.threads {
        if n == 0 {
            return Err(CliError::Config("--threads must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Config(format!("thread pool: {e}")))?;
    }

    let mut cfg = match &args.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    for (k, v) in &overrides {
        cfg.set(k, v);
    }
    cfg.reject_unknown(&kind.allowed_keys())?;

    let (text, missing) = match kind.run(&cfg) {
        Ok(Output::Table { table, missing }) => match format {
            Format::Csv => (table.to_csv(), missing),
            Format::Json => (json_text(&table.to_json()), missing),
        },
        Ok(Output::Json(v)) => (json_text(&v), 0),
        Err(CliError::NotFound(record)) => {
            write_file(&out, &json_text(&record))?;
            return Err(CliError::NotFound(record));
        }
        Err(e) => return Err(e),
    };
    write_file(&out, &text)?;
    Ok(missing)
}

fn json_text(v: &serde_json::Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("JSON values serialize");
    s.push('\n');
    s
}

fn write_file(path: &PathBuf, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text).map_err(|e| CliError::Output(format!("cannot write {}: {e}", path.display())))
}

fn main() -> ExitCode {
    let (kind, args) = Cli::parse().command.split();
    match run(kind, args) {
        Ok(missing) => {
            if missing > 0 {
                eprintln!("warning: {missing} grid point(s) undefined, written as NaN");
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
