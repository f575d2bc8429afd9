//! Command-line front end: `simulate`, `stats`, `test` and `enumerate`.
//!
//! Standard output carries exactly one payload (a table or one line of
//! JSON); timing and diagnostics go to standard error. Exit codes: 0 on
//! success, 1 for usage, parse and I/O errors, 2 when the test sample holds
//! no accepted table or an enumerated fiber is empty.

pub mod args;
pub mod commands;

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::Parser;
use serde::Serialize;

pub use args::{Cli, Command, EnumerateArgs, SamplerArgs, Simulate, TestArgs};
pub use commands::{
    cmd_enumerate, cmd_simulate, cmd_stats, cmd_test, read_table, EnumerateOutput, StatsOutput,
    TestOutput, SCHEMA,
};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Parse(#[from] isingsis_core::ParseError),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error(transparent)]
    Core(#[from] isingsis_core::Error),
}

impl CliError {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        Self::Io {
            path: path.to_owned(),
            source,
        }
    }

    pub fn exit_code(&self) -> i32 {
        use isingsis_core::Error;
        match self {
            CliError::Core(Error::EmptySample | Error::AllWeightsZero | Error::EmptyFiber) => 2,
            _ => 1,
        }
    }
}

fn emit(payload: &str, output: Option<&Path>, stdout: &mut dyn Write) -> Result<(), CliError> {
    match output {
        Some(path) => std::fs::write(path, payload).map_err(|e| CliError::io(path, e)),
        None => stdout
            .write_all(payload.as_bytes())
            .map_err(|e| CliError::io(Path::new("<stdout>"), e)),
    }
}

fn json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string(value).expect("payloads serialize");
    s.push('\n');
    s
}

fn execute(cli: Cli, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<(), CliError> {
    match cli.command {
        Command::Simulate(sim) => {
            let table = cmd_simulate(&sim)?;
            let s = cmd_stats(&table);
            let _ = writeln!(
                stderr,
                "t1={} t2={} u={} uprime={}",
                s.t1, s.t2, s.u, s.uprime
            );
            let output = match &sim {
                Simulate::Ising(a) => a.common.output.as_deref(),
                Simulate::Autologistic(a) => a.common.output.as_deref(),
            };
            emit(&table.to_string(), output, stdout)
        }
        Command::Stats(a) => {
            let table = read_table(&a.input)?;
            emit(&json(&cmd_stats(&table)), a.output.as_deref(), stdout)
        }
        Command::Test(a) => {
            let table = read_table(&a.input)?;
            let start = Instant::now();
            let report = cmd_test(&table, &a);
            let _ = writeln!(stderr, "elapsed {:.3} s", start.elapsed().as_secs_f64());
            let report = report?;
            let _ = writeln!(stderr, "accepted {}/{}", report.n_accepted, report.n_trials);
            emit(&json(&report), a.output.as_deref(), stdout)
        }
        Command::Enumerate(a) => emit(&json(&cmd_enumerate(&a)?), a.output.as_deref(), stdout),
    }
}

/// Parses `args` (including the program name) and runs the command.
/// Returns the process exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            if e.use_stderr() {
                let _ = write!(stderr, "{}", e.render());
                return 1;
            }
            let _ = write!(stdout, "{}", e.render());
            return 0;
        }
    };
    match execute(cli, stdout, stderr) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            e.exit_code()
        }
    }
}
