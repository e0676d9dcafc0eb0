use std::io::Write;
use std::path::PathBuf;
use std::time::Instant;

use clap::Args;
use dispersion_core::io::{self, Format, SolutionReport};
use dispersion_core::ptas::PtasParams;
use dispersion_core::solution::L2_REL_TOL;
use dispersion_core::{
    brute_force_with, choose_m, greedy_baseline, solve_fixed_k_with, solve_ptas, subset_weight,
    Algorithm, Error, Metric, PointSet, Result, Solution,
};
use num_rational::Ratio;

use crate::{
    emit, parse_algorithm, parse_format, parse_metric, parse_ratio, read_input, CmdResult, Failure,
    InputArgs, LimitArgs,
};

#[derive(Debug, Clone, Args)]
pub struct SolveArgs {
    /// fixed-k, ptas, brute or greedy.
    #[arg(long, value_parser = parse_algorithm)]
    pub algo: Algorithm,
    /// Number of points to select.
    #[arg(long)]
    pub k: usize,
    /// l1, linf or l2.
    #[arg(long, value_parser = parse_metric, default_value = "l1")]
    pub metric: Metric,
    /// PTAS strips per axis.
    #[arg(long, conflicts_with = "epsilon")]
    pub m: Option<usize>,
    /// PTAS accuracy; picks the smallest m >= 4 meeting it. Accepts p/q.
    #[arg(long, value_parser = parse_ratio)]
    pub epsilon: Option<Ratio<i64>>,
    #[command(flatten)]
    pub input: InputArgs,
    /// Solution file; standard output when omitted.
    #[arg(long, short)]
    pub output: Option<PathBuf>,
    /// Solution format.
    #[arg(long, value_parser = parse_format, default_value = "json")]
    pub report_format: Format,
    #[command(flatten)]
    pub limits: LimitArgs,
}

/// Resolves the PTAS strip count; `--epsilon` wins over a defaulted `--m`.
pub(crate) fn ptas_m(m: Option<usize>, epsilon: Option<Ratio<i64>>) -> Result<Option<usize>> {
    match (epsilon, m) {
        (Some(eps), _) => choose_m(eps).map(Some),
        (None, m) => Ok(m),
    }
}

pub(crate) fn run_algorithm(
    points: &PointSet,
    algo: Algorithm,
    k: usize,
    metric: Metric,
    m: Option<usize>,
    limits: &LimitArgs,
) -> Result<Solution> {
    let started = Instant::now();
    match algo {
        Algorithm::FixedK => solve_fixed_k_with(points, k, metric, &limits.subset_limits(started)),
        Algorithm::BruteForce => {
            brute_force_with(points, k, metric, &limits.subset_limits(started))
        }
        Algorithm::Greedy => greedy_baseline(points, k, metric),
        Algorithm::Ptas => {
            let m =
                m.ok_or_else(|| Error::InvalidParameter("ptas needs --m or --epsilon".into()))?;
            let params = PtasParams {
                limits: limits.config_limits(started),
                ..PtasParams::new(m, metric)
            };
            solve_ptas(points, k, &params)
        }
    }
}

pub(crate) fn cmd_solve(
    args: &SolveArgs,
    stdout: &mut dyn Write,
    _stderr: &mut dyn Write,
) -> CmdResult {
    let m = ptas_m(args.m, args.epsilon)?;
    let points = args.input.load()?;
    let sol = run_algorithm(&points, args.algo, args.k, args.metric, m, &args.limits)?;
    let mut report = SolutionReport::from(&sol);
    report.stats.scale = Some(args.input.scale());
    let bytes = io::write_report(&report, args.report_format)?;
    emit(args.output.as_deref(), &bytes, stdout)
}

#[derive(Debug, Clone, Args)]
pub struct VerifyArgs {
    #[command(flatten)]
    pub input: InputArgs,
    /// Solution file written by `solve`.
    #[arg(long, short)]
    pub solution: PathBuf,
    /// Solution format; inferred from the file extension, else json.
    #[arg(long, value_parser = parse_format)]
    pub solution_format: Option<Format>,
}

fn weights_match(claimed: &str, actual: &str, metric: Metric) -> bool {
    if metric.is_exact() {
        return claimed.trim() == actual;
    }
    match (claimed.trim().parse::<f64>(), actual.parse::<f64>()) {
        (Ok(c), Ok(a)) => (c - a).abs() <= L2_REL_TOL * c.abs().max(a.abs()).max(1.0),
        _ => false,
    }
}

pub(crate) fn cmd_verify(
    args: &VerifyArgs,
    stdout: &mut dyn Write,
    _stderr: &mut dyn Write,
) -> CmdResult {
    let bytes = read_input(&args.solution)?;
    let format = args
        .solution_format
        .or_else(|| Format::from_path(&args.solution))
        .unwrap_or(Format::Json);
    let report = io::parse_solution(&bytes, format)
        .map_err(|e| Failure::usage(format!("{}: {e}", args.solution.display())))?;
    let scale = args
        .input
        .scale
        .or(report.stats.scale)
        .unwrap_or(io::DEFAULT_SCALE);
    let points = args.input.load_scaled(scale)?;
    let metric = report.metric()?;

    if report.k != report.indices.len() {
        return Err(Failure::verify(format!(
            "k is {} but {} indices are listed",
            report.k,
            report.indices.len()
        )));
    }
    let weight = subset_weight(&points, &report.indices, metric)
        .map_err(|e| Failure::verify(format!("infeasible selection: {e}")))?;
    let actual = weight.reported(metric);
    if !weights_match(&report.weight, &actual, metric) {
        return Err(Failure::verify(format!(
            "weight mismatch\n  claimed:    {}\n  recomputed: {actual}",
            report.weight
        )));
    }
    writeln!(stdout, "ok: k={} metric={metric} weight={actual}", report.k)
        .map_err(|e| Failure::usage(e.to_string()))
}
