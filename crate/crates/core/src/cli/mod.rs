//! Command line front end.
//!
//! Exit codes: 0 when every check passes, 1 when a check fails, 2 when the
//! arguments or config are rejected. Config errors write no output file.

pub mod args;
pub mod commands;
pub mod verify;

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::Parser;
use thiserror::Error;

use args::{Cli, Command, Emit, ExperimentConfig};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

/// Rendered output of one command.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub body: String,
    pub pass: bool,
    pub summary: String,
}

pub fn dispatch(command: &Command, emit: Emit) -> Result<Outcome, CliError> {
    match command {
        Command::Density(a) => commands::density(a, emit),
        Command::Forge(a) => commands::forge(a, emit),
        Command::Schedule(a) => commands::schedule(a, emit),
        Command::Orbit(a) => commands::orbit_cmd(a, emit),
        Command::Shadow(a) => commands::shadow(a, emit),
        Command::Prop50(a) => commands::prop50(a, emit),
        Command::Prop51(a) => commands::prop51(a, emit),
        Command::Hits(a) => commands::hits(a, emit),
        Command::Identity(a) => commands::identity(a, emit),
        Command::Verify(a) => verify::verify(a, emit),
        Command::Run(_) => Err(CliError::Config("run configs cannot nest".into())),
    }
}

pub fn default_emit(command: &Command) -> Emit {
    match command {
        Command::Density(_) => Emit::Csv,
        _ => Emit::Json,
    }
}

/// Parses a config document; unknown keys are rejected and randomized
/// experiments must name their seed.
pub fn load_config(path: &Path) -> Result<ExperimentConfig, CliError> {
    let err = |e: &dyn std::fmt::Display| CliError::Config(format!("{}: {e}", path.display()));
    let text = std::fs::read_to_string(path).map_err(|e| err(&e))?;
    let value: serde_json::Value = serde_json::from_str(&text).map_err(|e| err(&e))?;
    let experiment = value.get("experiment");
    let is_verify = experiment.and_then(|e| e.get("command")).and_then(|c| c.as_str()) == Some("verify");
    if is_verify && experiment.and_then(|e| e.get("seed")).is_none() {
        return Err(err(&"verify experiments need an explicit seed"));
    }
    serde_json::from_value(value).map_err(|e| err(&e))
}

/// Writes through a sibling temporary file so readers never see a partial file.
pub fn write_atomic(path: &Path, body: &str) -> std::io::Result<()> {
    let dir = path.parent().filter(|d| !d.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let name = path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
    let tmp = dir.join(format!(".{name}.{}.tmp", std::process::id()));
    let result = std::fs::write(&tmp, body).and_then(|()| std::fs::rename(&tmp, path));
    if result.is_err() {
        let _ = std::fs::remove_file(&tmp);
    }
    result
}

fn run(cli: Cli) -> Result<Outcome, CliError> {
    let (command, emit, out): (Command, Option<Emit>, Option<PathBuf>) = match cli.command {
        Command::Run(r) => {
            let cfg = load_config(&r.config)?;
            (cfg.experiment, cli.emit.or(cfg.emit), cli.out.or(cfg.out))
        }
        c => (c, cli.emit, cli.out),
    };
    let emit = emit.unwrap_or_else(|| default_emit(&command));
    let outcome = dispatch(&command, emit)?;
    match out {
        Some(p) => write_atomic(&p, &outcome.body)?,
        None => match std::io::stdout().write_all(outcome.body.as_bytes()) {
            Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => {}
            r => r?,
        },
    }
    Ok(outcome)
}

/// Parses `args` (program name first) without exiting on errors.
pub fn parse_cli<I, T>(args: I) -> Result<Cli, clap::Error>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    Cli::try_parse_from(args)
}

/// Runs the binary on `args` (program name first) and returns the exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match parse_cli(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match run(cli) {
        Ok(o) => {
            eprintln!("{}: {}", if o.pass { "PASS" } else { "FAIL" }, o.summary);
            i32::from(!o.pass)
        }
        Err(CliError::Config(m)) => {
            eprintln!("error: {m}");
            2
        }
        Err(e) => {
            eprintln!("error: {e}");
            2
        }
    }
}
