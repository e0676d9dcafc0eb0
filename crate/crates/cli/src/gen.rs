use std::io::Write;
use std::path::PathBuf;

use clap::Args;
use dispersion_core::io::{self, Distribution, Format, InstanceSpec};

use crate::{emit, parse_format, CmdResult, Failure};

#[derive(Debug, Clone, Args)]
pub struct GenArgs {
    /// Number of points.
    #[arg(long)]
    pub n: usize,
    /// Dimension.
    #[arg(long, default_value_t = 2)]
    pub d: usize,
    /// Smallest coordinate.
    #[arg(long, default_value_t = -50, allow_negative_numbers = true)]
    pub lo: i64,
    /// Largest coordinate.
    #[arg(long, default_value_t = 50, allow_negative_numbers = true)]
    pub hi: i64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Number of cluster centers; points are uniform otherwise.
    #[arg(long, requires = "spread")]
    pub clusters: Option<usize>,
    /// Per-axis offset bound around a cluster center.
    #[arg(long, requires = "clusters")]
    pub spread: Option<i64>,
    #[arg(long, value_parser = parse_format, default_value = "csv")]
    pub format: Format,
    /// Instance file; standard output when omitted.
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

impl GenArgs {
    pub fn spec(&self) -> InstanceSpec {
        let distribution = match (self.clusters, self.spread) {
            (Some(clusters), Some(spread)) => Distribution::Clustered { clusters, spread },
            _ => Distribution::Uniform,
        };
        InstanceSpec {
            n: self.n,
            dim: self.d,
            lo: self.lo,
            hi: self.hi,
            distribution,
            seed: self.seed,
        }
    }
}

pub(crate) fn cmd_gen(args: &GenArgs, stdout: &mut dyn Write, stderr: &mut dyn Write) -> CmdResult {
    let spec = args.spec();
    let points = io::generate_instance(&spec).map_err(|e| Failure::usage(e.to_string()))?;
    let bytes = io::write_instance(&points, args.format, 0)?;
    emit(args.output.as_deref(), &bytes, stdout)?;
    let echo = serde_json::to_string(&spec).map_err(|e| Failure::usage(e.to_string()))?;
    // keep stdout clean when it carries the instance
    let written = if args.output.is_some() {
        writeln!(stdout, "{echo}")
    } else {
        writeln!(stderr, "{echo}")
    };
    written.map_err(|e| Failure::usage(e.to_string()))
}
