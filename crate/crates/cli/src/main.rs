//! `surprise`: command-line driver for the election-surprise simulator.
//!
//! Exit codes: 0 success, 2 invalid input, 3 the run failed (for example a
//! conditioning event that never occurred, or an oracle mismatch).

mod args;
mod commands;
mod output;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{CommandFactory, Parser, Subcommand};
use election_surprise::RngSeed;
use serde::de::DeserializeOwned;
use serde_json::{Map, Value};

use args::{BrexitArgs, Merge, MpfbArgs, OracleArgs, SimulateArgs, TheoryArgs};
use output::{CliError, Outcome};

const DEFAULT_SEED: u64 = 1;
const DEFAULT_OUT: &str = "surprise-out";

#[derive(Parser, Debug)]
#[command(
    name = "surprise",
    version,
    about = "Surprise in elections over biased social networks",
    long_about = "Surprise in elections over biased social networks.\n\n\
        Every command reads its parameters from flags, from a JSON config file \
        (--config) and from built-in defaults, in that order of precedence. \
        Results, plus a manifest.json holding the effective configuration, seed \
        and version, are written to --out. Reruns with the same configuration \
        and seed produce byte-identical files for any --threads.\n\n\
        Exit codes: 0 success, 2 invalid input, 3 runtime failure."
)]
struct Cli {
    /// JSON object whose keys are the command's long flag names in
    /// snake_case, plus optional `seed`, `threads`, `out` and `command`.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,
    /// Master seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads (default: all cores). Never changes results.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Output directory.
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Monte Carlo surprise, beat probabilities and MPFB factors.
    Simulate(SimulateArgs),
    /// Closed-form verdicts and bounds, optionally checked by simulation.
    TheoryCheck(TheoryArgs),
    /// Empirical versus analytic MPFB ordering of plurality, Borda and veto.
    MpfbCompare(MpfbArgs),
    /// Desk-scale referendum experiment on a geographic network.
    Brexit(BrexitArgs),
    /// Monte Carlo against exact enumeration on small electorates.
    OracleCheck(OracleArgs),
    /// Print the manual page (roff) to stdout.
    #[command(hide = true)]
    Man,
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Simulate(_) => "simulate",
            Command::TheoryCheck(_) => "theory-check",
            Command::MpfbCompare(_) => "mpfb-compare",
            Command::Brexit(_) => "brexit",
            Command::OracleCheck(_) => "oracle-check",
            Command::Man => "man",
        }
    }
}

/// Global settings after layering flags over the config file.
struct Globals {
    seed: u64,
    threads: Option<usize>,
    out: PathBuf,
}

struct ConfigFile {
    globals: Map<String, Value>,
    params: Map<String, Value>,
}

fn load_config(path: Option<&Path>, command: &str) -> Result<ConfigFile, CliError> {
    let Some(path) = path else {
        return Ok(ConfigFile {
            globals: Map::new(),
            params: Map::new(),
        });
    };
    let text = std::fs::read_to_string(path).map_err(|e| {
        CliError::validation(format!("invalid input `config`: {}: {e}", path.display()))
    })?;
    let value: Value = serde_json::from_str(&text).map_err(|e| {
        CliError::validation(format!("invalid input `config`: {}: {e}", path.display()))
    })?;
    let Value::Object(mut params) = value else {
        return Err(CliError::validation(
            "invalid input `config`: expected a JSON object".into(),
        ));
    };
    let mut globals = Map::new();
    for key in ["seed", "threads", "out", "command"] {
        if let Some(v) = params.remove(key) {
            globals.insert(key.to_string(), v);
        }
    }
    if let Some(c) = globals.get("command") {
        if c.as_str() != Some(command) {
            return Err(CliError::validation(format!(
                "invalid input `command`: config file is for {c}, not `{command}`"
            )));
        }
    }
    Ok(ConfigFile { globals, params })
}

fn global<T: DeserializeOwned>(file: &ConfigFile, key: &str) -> Result<Option<T>, CliError> {
    file.globals
        .get(key)
        .map(|v| serde_json::from_value(v.clone()))
        .transpose()
        .map_err(|e| CliError::validation(format!("invalid input `{key}`: {e}")))
}

fn layered<T: DeserializeOwned + Merge>(flags: T, file: &ConfigFile) -> Result<T, CliError> {
    let from_file: T = serde_json::from_value(Value::Object(file.params.clone()))
        .map_err(|e| CliError::validation(format!("invalid input `config`: {e}")))?;
    Ok(flags.merge(from_file))
}

fn run(cli: Cli) -> Result<(), CliError> {
    if let Command::Man = cli.command {
        let mut buf = Vec::new();
        clap_mangen::Man::new(Cli::command())
            .render(&mut buf)
            .map_err(|e| CliError::runtime(e.to_string()))?;
        print!("{}", String::from_utf8_lossy(&buf));
        return Ok(());
    }
    let file = load_config(cli.config.as_deref(), cli.command.name())?;
    let globals = Globals {
        seed: cli
            .seed
            .map_or_else(|| global(&file, "seed"), |s| Ok(Some(s)))?
            .unwrap_or(DEFAULT_SEED),
        threads: cli
            .threads
            .map_or_else(|| global(&file, "threads"), |t| Ok(Some(t)))?,
        out: cli
            .out
            .map_or_else(|| global(&file, "out"), |o| Ok(Some(o)))?
            .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT)),
    };
    if globals.threads == Some(0) {
        return Err(CliError::validation(
            "invalid input `threads`: must be at least 1".into(),
        ));
    }
    let seed = RngSeed::new(globals.seed, 0);
    let job = move || -> Result<Outcome, CliError> {
        match cli.command {
            Command::Simulate(a) => commands::simulate(&layered(a, &file)?, seed),
            Command::TheoryCheck(a) => commands::theory_check(&layered(a, &file)?, seed),
            Command::MpfbCompare(a) => commands::mpfb_compare(&layered(a, &file)?, seed),
            Command::Brexit(a) => commands::brexit(&layered(a, &file)?, seed),
            Command::OracleCheck(a) => commands::oracle_check(&layered(a, &file)?, seed),
            Command::Man => unreachable!("handled above"),
        }
    };
    let outcome = match globals.threads {
        Some(t) => rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build()
            .map_err(|e| CliError::runtime(e.to_string()))?
            .install(job)?,
        None => job()?,
    };
    outcome.finish(&globals.out, globals.seed)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
