//! The `dispersion` command-line tool.
//!
//! Exit codes: 0 success, 1 usage or input error, 2 infeasible request or
//! exhausted budget, 3 verification failure.

mod bench;
mod gen;
mod solve;

use std::ffi::OsString;
use std::fs;
use std::io::{self, Read, Write};
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use clap::{Args, Parser, Subcommand};
use dispersion_core::io::{Format, DEFAULT_SCALE};
use dispersion_core::{Algorithm, Error, Metric, SearchLimits};
use num_rational::Ratio;

pub use bench::BenchArgs;
pub use gen::GenArgs;
pub use solve::{SolveArgs, VerifyArgs};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_INFEASIBLE: i32 = 2;
pub const EXIT_VERIFY: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "dispersion", version, about = "Max-sum dispersion solver")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Select k points maximizing the sum of pairwise distances.
    Solve(SolveArgs),
    /// Write a seeded random instance.
    Gen(GenArgs),
    /// Check a solution file against its instance.
    Verify(VerifyArgs),
    /// Run several algorithms over a set of instances and compare them.
    Bench(BenchArgs),
}

/// Instance input options shared by several commands.
#[derive(Debug, Clone, Args)]
pub struct InputArgs {
    /// Instance file, or `-` for standard input.
    #[arg(long, short)]
    pub input: PathBuf,
    /// Instance format; inferred from the file extension, else csv.
    #[arg(long, value_parser = parse_format)]
    pub format: Option<Format>,
    /// Decimal digits kept when scaling coordinates to integers [default: 4].
    #[arg(long)]
    pub scale: Option<u32>,
    /// Skip the first line of a CSV instance.
    #[arg(long)]
    pub header: bool,
}

/// Work and time limits shared by solve and bench.
#[derive(Debug, Clone, Copy, Args)]
pub struct LimitArgs {
    /// Maximum number of k-subsets an exhaustive search may score.
    #[arg(long, default_value_t = dispersion_core::search::DEFAULT_SUBSET_BUDGET)]
    pub subset_budget: u64,
    /// Maximum number of PTAS configurations.
    #[arg(long, default_value_t = dispersion_core::ptas::DEFAULT_CONFIG_BUDGET)]
    pub config_budget: u64,
    /// Wall-clock limit per run, in seconds.
    #[arg(long)]
    pub time_limit: Option<f64>,
}

impl LimitArgs {
    fn deadline(&self, started: Instant) -> Option<Instant> {
        self.time_limit
            .map(|s| started + Duration::from_secs_f64(s.max(0.0)))
    }

    pub(crate) fn subset_limits(&self, started: Instant) -> SearchLimits {
        SearchLimits {
            max_evaluations: self.subset_budget,
            deadline: self.deadline(started),
        }
    }

    pub(crate) fn config_limits(&self, started: Instant) -> SearchLimits {
        SearchLimits {
            max_evaluations: self.config_budget,
            deadline: self.deadline(started),
        }
    }
}

/// A failed command: exit code plus a message for stderr.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Failure {
    pub code: i32,
    pub message: String,
}

impl Failure {
    pub fn usage(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_USAGE,
            message: message.into(),
        }
    }

    pub fn verify(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_VERIFY,
            message: message.into(),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::InvalidK { .. } | Error::BudgetExceeded { .. } | Error::TimeLimit => {
                EXIT_INFEASIBLE
            }
            _ => EXIT_USAGE,
        };
        Self {
            code,
            message: e.to_string(),
        }
    }
}

pub type CmdResult = std::result::Result<(), Failure>;

pub(crate) fn parse_format(s: &str) -> Result<Format, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

pub(crate) fn parse_metric(s: &str) -> Result<Metric, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

pub(crate) fn parse_algorithm(s: &str) -> Result<Algorithm, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

/// A positive rational given as `p/q`, an integer, or a decimal.
pub fn parse_ratio(s: &str) -> Result<Ratio<i64>, String> {
    let bad = || format!("not a rational number: {s:?}");
    let s = s.trim();
    if let Some((p, q)) = s.split_once('/') {
        let p: i64 = p.trim().parse().map_err(|_| bad())?;
        let q: i64 = q.trim().parse().map_err(|_| bad())?;
        if q == 0 {
            return Err(bad());
        }
        return Ok(Ratio::new(p, q));
    }
    let (int, frac) = s.split_once('.').unwrap_or((s, ""));
    if frac.len() > 17 || !frac.bytes().all(|b| b.is_ascii_digit()) {
        return Err(bad());
    }
    let denom = 10i64.pow(frac.len() as u32);
    let digits: i64 = format!("{int}{frac}").parse().map_err(|_| bad())?;
    Ok(Ratio::new(digits, denom))
}

/// Comma-separated list of values, each also allowing `a..b` (inclusive)
/// ranges for integers.
pub(crate) fn parse_usize_list(s: &str) -> Result<Vec<usize>, String> {
    let mut out = Vec::new();
    for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let num = |t: &str| {
            t.trim()
                .parse::<usize>()
                .map_err(|_| format!("bad integer {t:?}"))
        };
        match part.split_once("..") {
            Some((a, b)) => {
                let (a, b) = (num(a)?, num(b.trim_start_matches('='))?);
                if a > b {
                    return Err(format!("empty range {part:?}"));
                }
                out.extend(a..=b);
            }
            None => out.push(num(part)?),
        }
    }
    if out.is_empty() {
        return Err("empty list".into());
    }
    Ok(out)
}

pub(crate) fn read_input(path: &Path) -> Result<Vec<u8>, Failure> {
    if path == Path::new("-") {
        let mut buf = Vec::new();
        io::stdin()
            .read_to_end(&mut buf)
            .map_err(|e| Failure::usage(format!("reading standard input: {e}")))?;
        return Ok(buf);
    }
    fs::read(path).map_err(|e| Failure::usage(format!("{}: {e}", path.display())))
}

pub(crate) fn format_for(path: &Path, explicit: Option<Format>) -> Format {
    explicit
        .or_else(|| Format::from_path(path))
        .unwrap_or(Format::Csv)
}

impl InputArgs {
    pub(crate) fn scale(&self) -> u32 {
        self.scale.unwrap_or(DEFAULT_SCALE)
    }

    pub(crate) fn load(&self) -> Result<dispersion_core::PointSet, Failure> {
        self.load_scaled(self.scale())
    }

    pub(crate) fn load_scaled(&self, scale: u32) -> Result<dispersion_core::PointSet, Failure> {
        let bytes = read_input(&self.input)?;
        let format = format_for(&self.input, self.format);
        let points = match format {
            Format::Csv => dispersion_core::io::parse_csv_instance(&bytes, scale, self.header),
            Format::Json => dispersion_core::io::parse_instance(&bytes, format, scale),
        };
        points.map_err(|e| Failure::usage(format!("{}: {e}", self.input.display())))
    }
}

/// Writes to `path`, or to `stdout` when no path is given.
pub(crate) fn emit(path: Option<&Path>, bytes: &[u8], stdout: &mut dyn Write) -> CmdResult {
    match path {
        Some(p) => fs::write(p, bytes).map_err(|e| Failure::usage(format!("{}: {e}", p.display()))),
        None => stdout
            .write_all(bytes)
            .map_err(|e| Failure::usage(format!("writing output: {e}"))),
    }
}

/// Parses `args` (program name first) and runs the command.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() {
                stderr.write_all(text.as_bytes())
            } else {
                stdout.write_all(text.as_bytes())
            };
            return code;
        }
    };
    let result = match &cli.command {
        Command::Solve(a) => solve::cmd_solve(a, stdout, stderr),
        Command::Gen(a) => gen::cmd_gen(a, stdout, stderr),
        Command::Verify(a) => solve::cmd_verify(a, stdout, stderr),
        Command::Bench(a) => bench::cmd_bench(a, stdout, stderr),
    };
    match result {
        Ok(()) => EXIT_OK,
        Err(f) => {
            let _ = writeln!(stderr, "error: {}", f.message);
            f.code
        }
    }
}
