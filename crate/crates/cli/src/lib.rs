//! Command-line front end for `biosec`.
//!
//! Exit codes: 0 on success, 2 for invalid arguments or inputs outside an
//! operation's domain, 1 for I/O and internal failures.

use std::ffi::OsString;
use std::io::Write;

use clap::Parser;

mod args;
mod commands;
pub mod grid;
pub mod output;

pub use args::Cli;
use args::Command;

#[derive(Debug, Clone, PartialEq)]
pub enum CliError {
    Validation(String),
    Io(String),
}

impl CliError {
    pub fn validation(msg: impl Into<String>) -> Self {
        CliError::Validation(msg.into())
    }

    pub(crate) fn io(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => 2,
            CliError::Io(_) => 1,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Validation(m) => write!(f, "invalid input: {m}"),
            CliError::Io(m) => write!(f, "i/o error: {m}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<biosec::Error> for CliError {
    fn from(e: biosec::Error) -> Self {
        CliError::Validation(e.to_string())
    }
}

/// Parses `argv` (including the program name), runs the command and writes
/// its result to `out` and diagnostics to `err`. Returns the exit code.
pub fn run<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let rendered = e.render().to_string();
            let sink: &mut dyn Write = if e.use_stderr() { err } else { out };
            let _ = sink.write_all(rendered.as_bytes());
            return code;
        }
    };
    match execute(&cli) {
        Ok(value) => match output::write(out, cli.format, &value) {
            Ok(()) => 0,
            Err(e) => {
                let _ = writeln!(err, "biosec: i/o error: {e}");
                1
            }
        },
        Err(e) => {
            let _ = writeln!(err, "biosec: {e}");
            e.exit_code()
        }
    }
}

fn execute(cli: &Cli) -> Result<serde_json::Value, CliError> {
    let ctx = biosec::Context::new(cli.precision_bits)?;
    match &cli.command {
        Command::Ci(a) => commands::ci(&ctx, a),
        Command::EstimateFmr(a) => commands::estimate_fmr(&ctx, a),
        Command::TQuantile(a) => commands::t_quantile_cmd(&ctx, a),
        Command::Attack(c) => commands::attack(&ctx, c),
        Command::Birthday(c) => commands::birthday(&ctx, c),
        Command::Grid(a) => commands::grid(&ctx, a),
        Command::Simulate(c) => commands::simulate(&ctx, c),
    }
}
