//! Command-line front end: graph file ingestion, command dispatch and
//! deterministic reports.

pub mod commands;
pub mod document;
pub mod report;

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

pub use document::{GraphDocument, Location, ParseError};

#[derive(Debug, Parser)]
#[command(name = "tzitzeica", version, about = "Tzitzeica equations on finite weighted graphs")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve by continuation and Newton; reports one solution.
    Solve(Common),
    /// Estimate the Brouwer degree on the a priori ball.
    Degree(Common),
    /// Report the a priori box and graph constants.
    Bounds(Common),
    /// Find the zero and a one-signed solution of the generalized equation.
    Multiplicity(Common),
    /// Audit the analytic invariants on the given instance.
    Check(Common),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Solve(_) => "solve",
            Command::Degree(_) => "degree",
            Command::Bounds(_) => "bounds",
            Command::Multiplicity(_) => "multiplicity",
            Command::Check(_) => "check",
        }
    }

    pub fn common(&self) -> &Common {
        match self {
            Command::Solve(c)
            | Command::Degree(c)
            | Command::Bounds(c)
            | Command::Multiplicity(c)
            | Command::Check(c) => c,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Equation {
    Classic,
    Generalized,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Text,
}

#[derive(Debug, Clone, Args)]
pub struct Common {
    /// Graph file.
    pub graph: PathBuf,
    /// Overrides `param equation` in the file.
    #[arg(long)]
    pub equation: Option<Equation>,
    /// Exponent A (default: `param A` in the file, else 1).
    #[arg(long = "A")]
    pub a: Option<f64>,
    /// Exponent B (default: `param B` in the file, else 1).
    #[arg(long = "B")]
    pub b: Option<f64>,
    #[arg(long, default_value_t = 1e-10)]
    pub tol: f64,
    #[arg(long = "max-iter", default_value_t = 200)]
    pub max_iter: usize,
    /// Multi-start count per scale for degree estimation.
    #[arg(long, default_value_t = 64)]
    pub starts: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Overrides the a priori ball radius.
    #[arg(long)]
    pub radius: Option<f64>,
    /// Report destination; stdout when absent.
    #[arg(long)]
    pub output: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Omit the timestamp and wall time so reports are byte-comparable.
    #[arg(long = "no-timestamp")]
    pub no_timestamp: bool,
}

/// Failure classes and their exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Failure {
    Usage = 1,
    Validation = 2,
    Numerical = 3,
}

impl Failure {
    pub fn code(self) -> i32 {
        self as i32
    }

    fn kind(self) -> &'static str {
        match self {
            Failure::Usage => "usage",
            Failure::Validation => "validation",
            Failure::Numerical => "numerical",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CliError {
    pub failure: Failure,
    pub reason: String,
}

impl CliError {
    pub fn usage(reason: impl Into<String>) -> Self {
        CliError { failure: Failure::Usage, reason: reason.into() }
    }

    pub fn validation(reason: impl Into<String>) -> Self {
        CliError { failure: Failure::Validation, reason: reason.into() }
    }

    pub fn numerical(reason: impl Into<String>) -> Self {
        CliError { failure: Failure::Numerical, reason: reason.into() }
    }

    /// The one-line JSON written to stderr.
    pub fn to_line(&self) -> String {
        report::render_json(&json!({
            "code": self.failure.code(),
            "kind": self.failure.kind(),
            "reason": self.reason,
        }))
    }
}

impl From<tzitzeica::Error> for CliError {
    fn from(e: tzitzeica::Error) -> Self {
        if e.is_validation() {
            CliError::validation(e.to_string())
        } else {
            CliError::numerical(e.to_string())
        }
    }
}

impl From<ParseError> for CliError {
    fn from(e: ParseError) -> Self {
        CliError::validation(e.to_string())
    }
}

pub fn parse_graph(path: &std::path::Path) -> Result<GraphDocument, ParseError> {
    GraphDocument::parse_file(path)
}

/// Runs one command and returns the process exit code. Reports go to
/// `out` (or `--output`), failure lines to `err`.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = write!(out, "{}", e.render());
                return 0;
            }
            let rendered = e.render().to_string();
            let first = rendered.lines().next().unwrap_or("invalid arguments");
            let reason = first.trim_start_matches("error: ").to_string();
            let _ = err.write_all(CliError::usage(reason).to_line().as_bytes());
            return Failure::Usage.code();
        }
    };

    let outcome = commands::execute(&cli.command);
    let common = cli.command.common();
    let (report, failure) = match outcome {
        Ok(done) => (Some(done.report), done.failure),
        Err(e) => (None, Some(e)),
    };
    if let Some(report) = report {
        let text = match common.format {
            Format::Json => report::render_json(&report),
            Format::Text => report::render_text(&report),
        };
        let written = match &common.output {
            Some(path) => std::fs::write(path, text.as_bytes())
                .map_err(|e| CliError::usage(format!("cannot write '{}': {e}", path.display()))),
            None => out.write_all(text.as_bytes()).map_err(|e| CliError::usage(e.to_string())),
        };
        if let Err(e) = written {
            let _ = err.write_all(e.to_line().as_bytes());
            return e.failure.code();
        }
    }
    match failure {
        None => 0,
        Some(e) => {
            let _ = err.write_all(e.to_line().as_bytes());
            e.failure.code()
        }
    }
}
