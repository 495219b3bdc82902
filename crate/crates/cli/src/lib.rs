//! `swapfid` command-line front end.
//!
//! Exit codes: 0 success, 1 usage or input error, 2 verification failure,
//! 3 model-validity error.

mod args;
mod commands;
mod fock_check;

use std::ffi::OsString;
use std::fmt;
use std::fs;
use std::io::{self, Write};

use clap::Parser;
use swapfid::{find_preset, Config};

pub use args::{Cli, Command, Common, Format};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_VERIFY: i32 = 2;
pub const EXIT_MODEL: i32 = 3;

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Model(swapfid::Error),
    Io(io::Error),
    /// The report is still written; only the exit status changes.
    Failed(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Io(_) => EXIT_USAGE,
            CliError::Failed(_) => EXIT_VERIFY,
            CliError::Model(e) => match e {
                swapfid::Error::ModelValidity(_) | swapfid::Error::Truncation { .. } => EXIT_MODEL,
                _ => EXIT_USAGE,
            },
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage error: {m}"),
            CliError::Model(e) => write!(f, "{e}"),
            CliError::Io(e) => write!(f, "i/o error: {e}"),
            CliError::Failed(m) => write!(f, "{m}"),
        }
    }
}

impl From<swapfid::Error> for CliError {
    fn from(e: swapfid::Error) -> Self {
        CliError::Model(e)
    }
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        CliError::Io(e)
    }
}

/// Preset, then config file, then `--set` overrides.
pub fn load_config(common: &Common) -> Result<Config, CliError> {
    let mut cfg = match &common.preset {
        Some(name) => find_preset(name)?.config(),
        None => Config::default(),
    };
    if let Some(path) = &common.config {
        let text = fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
        cfg.merge(&Config::parse(&text)?);
    }
    for assignment in &common.overrides {
        cfg.set_assignment(assignment)?;
    }
    Ok(cfg)
}

fn emit(common: &Common, body: &str, stdout: &mut dyn Write) -> Result<(), CliError> {
    if common.out == "-" {
        stdout.write_all(body.as_bytes())?;
    } else {
        fs::write(&common.out, body)?;
    }
    Ok(())
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = if e.use_stderr() {
                write!(stderr, "{}", e.render())
            } else {
                write!(stdout, "{}", e.render())
            };
            return code;
        }
    };
    let outcome = commands::dispatch(&cli).and_then(|(body, status)| {
        emit(&cli.common, &body, stdout)?;
        status
    });
    match outcome {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(stderr, "swapfid: {e}");
            e.exit_code()
        }
    }
}
