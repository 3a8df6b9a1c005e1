use std::fmt;
use std::fs;
use std::path::Path;

use serde::Serialize;
use serde_json::{json, Value};

pub const EXIT_VALIDATION: u8 = 2;
pub const EXIT_RUNTIME: u8 = 3;

#[derive(Debug)]
pub enum CliError {
    /// Bad input, detected before any work: exit 2.
    Validation(String),
    /// The run itself failed: exit 3.
    Runtime(String),
}

impl CliError {
    pub fn validation(msg: String) -> Self {
        CliError::Validation(msg)
    }

    pub fn runtime(msg: String) -> Self {
        CliError::Runtime(msg)
    }

    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Validation(_) => EXIT_VALIDATION,
            CliError::Runtime(_) => EXIT_RUNTIME,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Validation(m) | CliError::Runtime(m) => f.write_str(m),
        }
    }
}

impl From<election_surprise::Error> for CliError {
    fn from(e: election_surprise::Error) -> Self {
        let mut msg = e.to_string();
        if let election_surprise::Error::Ingest { rows, .. } = &e {
            for r in rows {
                msg.push_str("\n  ");
                msg.push_str(r);
            }
        }
        if e.is_validation() {
            CliError::Validation(msg)
        } else {
            CliError::Runtime(msg)
        }
    }
}

/// Files and console text produced by one command.
pub struct Outcome {
    command: &'static str,
    config: Value,
    files: Vec<(&'static str, Vec<u8>)>,
    stdout: String,
    failure: Option<String>,
}

impl Outcome {
    pub fn new(command: &'static str, effective: &impl Serialize) -> Self {
        Self {
            command,
            config: serde_json::to_value(effective).expect("config serializes"),
            files: Vec::new(),
            stdout: String::new(),
            failure: None,
        }
    }

    pub fn file(mut self, name: &'static str, bytes: Vec<u8>) -> Self {
        self.files.push((name, bytes));
        self
    }

    pub fn stdout(mut self, text: String) -> Self {
        self.stdout = text;
        self
    }

    /// Outputs are still written, but the command exits with a runtime error.
    pub fn fail(mut self, msg: String) -> Self {
        self.failure = Some(msg);
        self
    }

    /// Writes every file plus `manifest.json` into `dir`, prints the console
    /// text and returns the deferred failure, if any.
    pub fn finish(self, dir: &Path, seed: u64) -> Result<(), CliError> {
        fs::create_dir_all(dir).map_err(|e| io_error(dir, e))?;
        let mut outputs: Vec<&str> = self.files.iter().map(|(n, _)| *n).collect();
        outputs.push("manifest.json");
        let manifest = json!({
            "command": self.command,
            "version": version(),
            "seed": seed,
            "config": self.config,
            "outputs": outputs,
        });
        for (name, bytes) in &self.files {
            let path = dir.join(name);
            fs::write(&path, bytes).map_err(|e| io_error(&path, e))?;
        }
        let path = dir.join("manifest.json");
        let mut text = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
        text.push('\n');
        fs::write(&path, text).map_err(|e| io_error(&path, e))?;
        print!("{}", self.stdout);
        match self.failure {
            Some(msg) => Err(CliError::Runtime(msg)),
            None => Ok(()),
        }
    }
}

fn io_error(path: &Path, e: std::io::Error) -> CliError {
    CliError::Runtime(format!("{}: {e}", path.display()))
}

pub fn version() -> String {
    match option_env!("SURPRISE_GIT_DESCRIBE") {
        Some(d) if !d.is_empty() => format!("{} ({d})", env!("CARGO_PKG_VERSION")),
        _ => env!("CARGO_PKG_VERSION").to_string(),
    }
}
