//! Front end for `geolab`: spec loading, command dispatch and report output.
//!
//! Exit codes: 0 when the command ran, 2 when a verdict came out OBSTRUCTED,
//! 1 on any error (reported as one JSON object on stderr).

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod commands;
pub mod report;
pub mod spec;

use std::io::Write;
use std::path::PathBuf;
use std::time::Instant;

use clap::{Parser, ValueEnum};

pub use commands::{run, CliError, Command, Flags};
pub use report::{Check, CheckKind, Report};
pub use spec::{load_spec, parse_spec, SpecError, SpecFile, CATALOG};

pub const EXIT_OK: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_OBSTRUCTED: i32 = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum CommandArg {
    /// Curvature bundle at one point.
    Curvature,
    /// Plane-wave limit: scaling laws, Rosen to Brinkmann, isometry.
    Penrose,
    /// Obstruction verdicts for an axis matrix.
    Obstruct,
    /// Wick-rotation identities for a unit closed field.
    Wick,
    /// Brinkmann, pp-wave and plane-wave flags plus the slice check.
    Classify,
}

impl From<CommandArg> for Command {
    fn from(c: CommandArg) -> Self {
        match c {
            CommandArg::Curvature => Command::Curvature,
            CommandArg::Penrose => Command::Penrose,
            CommandArg::Obstruct => Command::Obstruct,
            CommandArg::Wick => Command::Wick,
            CommandArg::Classify => Command::Classify,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Text,
}

#[derive(Debug, Parser)]
#[command(name = "geolab", version, about = "Curvature, plane-wave limits and Wick rotations of coordinate metrics")]
pub struct Cli {
    #[arg(value_enum)]
    pub command: CommandArg,
    /// Spec file path, or a bundled name such as `exp_einstein3`.
    pub spec: String,
    /// Evaluation point, `k=v,...`.
    #[arg(long, allow_hyphen_values = true)]
    pub at: Option<String>,
    /// Axis grid, `a:b:h`.
    #[arg(long, allow_hyphen_values = true)]
    pub grid: Option<String>,
    /// Scaling parameters, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub eps: Option<Vec<f64>>,
    #[arg(long)]
    pub samples: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Vector field name for `wick`.
    #[arg(long)]
    pub field: Option<String>,
    #[arg(long, allow_negative_numbers = true)]
    pub lambda: Option<f64>,
    /// Verdict threshold for `obstruct`.
    #[arg(long)]
    pub threshold: Option<f64>,
    /// Write the report here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "json")]
    pub format: Format,
}

impl Cli {
    pub fn flags(&self) -> Flags {
        Flags {
            at: self.at.clone(),
            grid: self.grid.clone(),
            eps: self.eps.clone(),
            samples: self.samples,
            seed: self.seed,
            field: self.field.clone(),
            lambda: self.lambda,
            threshold: self.threshold,
        }
    }
}

/// Loads, runs and renders; the report carries the elapsed time.
pub fn execute(cli: &Cli) -> Result<(Report, String), CliError> {
    let start = Instant::now();
    let spec = load_spec(&cli.spec)?;
    let mut report = run(cli.command.into(), &spec, &cli.flags())?;
    report.wall_time = Some(start.elapsed().as_secs_f64());
    let text = match cli.format {
        Format::Json => report.to_json(),
        Format::Text => report.to_text(),
    };
    Ok((report, text))
}

/// Full process behavior minus `exit`: parses `args`, writes output, returns the code.
pub fn main_with<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = write!(stdout, "{e}");
                return EXIT_OK;
            }
            let _ = stderr.write_all(CliError::Usage(e.to_string().trim_end().to_string()).to_json().as_bytes());
            return EXIT_ERROR;
        }
    };
    let result = execute(&cli).and_then(|(report, text)| {
        match &cli.out {
            Some(path) => std::fs::write(path, &text)
                .map_err(|e| CliError::Output { path: path.display().to_string(), message: e.to_string() })?,
            None => stdout
                .write_all(text.as_bytes())
                .map_err(|e| CliError::Output { path: "<stdout>".into(), message: e.to_string() })?,
        }
        Ok(report)
    });
    match result {
        Ok(r) if r.obstructed() => EXIT_OBSTRUCTED,
        Ok(_) => EXIT_OK,
        Err(e) => {
            let _ = stderr.write_all(e.to_json().as_bytes());
            EXIT_ERROR
        }
    }
}
