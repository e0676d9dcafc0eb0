use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use clap::Args;
use dispersion_core::geometry::format_significant;
use dispersion_core::io::{self, Distribution, Format, InstanceSpec, DEFAULT_SCALE};
use dispersion_core::{Algorithm, Error, Metric, PointSet, Solution, Weight};
use num_rational::Ratio;
use rayon::prelude::*;

use crate::solve::{ptas_m, run_algorithm};
use crate::{emit, parse_metric, parse_ratio, parse_usize_list, CmdResult, Failure, LimitArgs};

pub const BENCH_HEADER: [&str; 10] = [
    "instance",
    "n",
    "d",
    "k",
    "metric",
    "algorithm",
    "weight",
    "ratio",
    "wall_ms",
    "configs",
];

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UsizeList(pub Vec<usize>);

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AlgoList(pub Vec<Algorithm>);

fn usize_list(s: &str) -> Result<UsizeList, String> {
    parse_usize_list(s).map(UsizeList)
}

fn algo_list(s: &str) -> Result<AlgoList, String> {
    let mut algos = s
        .split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(|t| t.parse::<Algorithm>().map_err(|e| e.to_string()))
        .collect::<Result<Vec<_>, _>>()?;
    algos.sort_by_key(|a| a.as_str());
    algos.dedup();
    if algos.is_empty() {
        return Err("empty algorithm list".into());
    }
    Ok(AlgoList(algos))
}

#[derive(Debug, Clone, Args)]
pub struct BenchArgs {
    /// Directory of instance files (*.csv, *.json) to run on, in file name
    /// order. Without it, instances are generated from the sweep flags.
    #[arg(long, conflicts_with_all = ["n", "clusters"])]
    pub instances: Option<PathBuf>,
    /// Decimal scale for instance files [default: 4].
    #[arg(long, requires = "instances")]
    pub scale: Option<u32>,
    /// Skip the first line of CSV instance files.
    #[arg(long, requires = "instances")]
    pub header: bool,

    /// Sweep sizes, e.g. `8..14` or `10,20,40`.
    #[arg(long, value_parser = usize_list, required_unless_present = "instances")]
    pub n: Option<UsizeList>,
    /// Instances per size.
    #[arg(long, default_value_t = 1)]
    pub reps: usize,
    /// Seed of the first generated instance; later ones count up from it.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 2)]
    pub d: usize,
    #[arg(long, default_value_t = -50, allow_negative_numbers = true)]
    pub lo: i64,
    #[arg(long, default_value_t = 50, allow_negative_numbers = true)]
    pub hi: i64,
    #[arg(long, requires = "spread")]
    pub clusters: Option<usize>,
    #[arg(long, requires = "clusters")]
    pub spread: Option<i64>,

    /// Subset sizes, e.g. `3` or `2..4`.
    #[arg(long, value_parser = usize_list)]
    pub k: UsizeList,
    #[arg(long, value_parser = parse_metric, default_value = "l1")]
    pub metric: Metric,
    /// Comma-separated algorithms to run.
    #[arg(long, value_parser = algo_list, default_value = "fixed-k,ptas,greedy,brute")]
    pub algos: AlgoList,
    /// PTAS strips per axis.
    #[arg(long, conflicts_with = "epsilon", default_value_t = 4)]
    pub m: usize,
    #[arg(long, value_parser = parse_ratio)]
    pub epsilon: Option<Ratio<i64>>,
    #[command(flatten)]
    pub limits: LimitArgs,

    /// Fill the wall_ms column. Timings make the report differ run to run.
    #[arg(long)]
    pub timing: bool,
    /// Worker threads; all cores when omitted.
    #[arg(long)]
    pub threads: Option<usize>,
    /// Report CSV; standard output when omitted.
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

struct Instance {
    id: String,
    points: PointSet,
}

/// One (instance, k, algorithm) run.
pub struct BenchRow {
    pub instance: String,
    pub n: usize,
    pub d: usize,
    pub k: usize,
    pub metric: Metric,
    pub algorithm: Algorithm,
    pub outcome: Result<Solution, Error>,
    pub ratio: Option<(String, f64)>,
    pub wall: Duration,
}

impl BenchRow {
    fn weight_field(&self) -> String {
        match &self.outcome {
            Ok(sol) => sol.reported_weight(),
            Err(Error::BudgetExceeded { .. }) => "budget_exceeded".into(),
            Err(Error::TimeLimit) => "timeout".into(),
            Err(Error::InvalidK { .. }) => "infeasible".into(),
            Err(_) => "error".into(),
        }
    }

    fn record(&self, timing: bool) -> [String; 10] {
        [
            self.instance.clone(),
            self.n.to_string(),
            self.d.to_string(),
            self.k.to_string(),
            self.metric.to_string(),
            self.algorithm.to_string(),
            self.weight_field(),
            self.ratio.as_ref().map(|r| r.0.clone()).unwrap_or_default(),
            if timing {
                format!("{:.3}", self.wall.as_secs_f64() * 1e3)
            } else {
                String::new()
            },
            self.outcome
                .as_ref()
                .map(|s| s.stats.work().to_string())
                .unwrap_or_default(),
        ]
    }
}

/// Ratio of `heuristic` to `optimum`: reduced `p/q` for exact weights, a
/// 12-digit decimal for Euclidean ones. An all-zero optimum counts as 1/1.
pub fn oracle_ratio(heuristic: Weight, optimum: Weight) -> (String, f64) {
    match (heuristic, optimum) {
        (Weight::Exact(_), Weight::Exact(0)) => ("1/1".into(), 1.0),
        (Weight::Exact(h), Weight::Exact(o)) => {
            let r = Ratio::new(h, o);
            (format!("{}/{}", r.numer(), r.denom()), h as f64 / o as f64)
        }
        (h, o) => {
            let (h, o) = (h.as_f64(), o.as_f64());
            let v = if o == 0.0 { 1.0 } else { h / o };
            (format_significant(v, 12), v)
        }
    }
}

fn load_dir(dir: &Path, scale: u32, header: bool) -> Result<Vec<Instance>, Failure> {
    let entries =
        fs::read_dir(dir).map_err(|e| Failure::usage(format!("{}: {e}", dir.display())))?;
    let mut files: Vec<(PathBuf, Format)> = entries
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter_map(|p| Format::from_path(&p).map(|f| (p, f)))
        .collect();
    files.sort_by(|a, b| a.0.cmp(&b.0));
    if files.is_empty() {
        return Err(Failure::usage(format!(
            "{}: no .csv or .json instances",
            dir.display()
        )));
    }
    files
        .into_iter()
        .map(|(path, format)| {
            let bytes =
                fs::read(&path).map_err(|e| Failure::usage(format!("{}: {e}", path.display())))?;
            let points = match format {
                Format::Csv => io::parse_csv_instance(&bytes, scale, header),
                Format::Json => io::parse_instance(&bytes, format, scale),
            }
            .map_err(|e| Failure::usage(format!("{}: {e}", path.display())))?;
            let id = path
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_default();
            Ok(Instance { id, points })
        })
        .collect()
}

fn generate_sweep(args: &BenchArgs, sizes: &[usize]) -> Result<Vec<Instance>, Failure> {
    let mut sizes = sizes.to_vec();
    sizes.sort_unstable();
    sizes.dedup();
    let distribution = match (args.clusters, args.spread) {
        (Some(clusters), Some(spread)) => Distribution::Clustered { clusters, spread },
        _ => Distribution::Uniform,
    };
    let mut out = Vec::new();
    for &n in &sizes {
        for rep in 0..args.reps {
            let spec = InstanceSpec {
                n,
                dim: args.d,
                lo: args.lo,
                hi: args.hi,
                distribution,
                seed: args.seed.wrapping_add(out.len() as u64),
            };
            let points = io::generate_instance(&spec).map_err(|e| Failure::usage(e.to_string()))?;
            out.push(Instance {
                id: format!("n{n:04}-r{rep:03}"),
                points,
            });
        }
    }
    Ok(out)
}

fn timed(
    inst: &Instance,
    k: usize,
    algo: Algorithm,
    metric: Metric,
    m: Option<usize>,
    limits: &LimitArgs,
) -> (Result<Solution, Error>, Duration) {
    let started = Instant::now();
    let outcome = run_algorithm(&inst.points, algo, k, metric, m, limits);
    (outcome, started.elapsed())
}

fn run_instance(inst: &Instance, k: usize, args: &BenchArgs, m: usize) -> Vec<BenchRow> {
    let metric = args.metric;
    let oracle = timed(inst, k, Algorithm::BruteForce, metric, None, &args.limits);
    let optimum = oracle.0.as_ref().ok().map(|s| s.weight);
    args.algos
        .0
        .iter()
        .map(|&algo| {
            let (outcome, wall) = if algo == Algorithm::BruteForce {
                oracle.clone()
            } else {
                timed(inst, k, algo, metric, Some(m), &args.limits)
            };
            let ratio = match (&outcome, optimum) {
                (Ok(sol), Some(opt)) => Some(oracle_ratio(sol.weight, opt)),
                _ => None,
            };
            BenchRow {
                instance: inst.id.clone(),
                n: inst.points.len(),
                d: inst.points.dim(),
                k,
                metric,
                algorithm: algo,
                outcome,
                ratio,
                wall,
            }
        })
        .collect()
}

/// Runs every algorithm on every (instance, k) pair; rows come back sorted
/// by instance, algorithm and k.
fn run_all(instances: &[Instance], args: &BenchArgs, m: usize) -> Vec<BenchRow> {
    let jobs: Vec<(&Instance, usize)> = instances
        .iter()
        .flat_map(|inst| args.k.0.iter().map(move |&k| (inst, k)))
        .collect();
    let mut rows: Vec<BenchRow> = jobs
        .par_iter()
        .flat_map_iter(|&(inst, k)| run_instance(inst, k, args, m))
        .collect();
    rows.sort_by(|a, b| {
        (&a.instance, a.algorithm.as_str(), a.k).cmp(&(&b.instance, b.algorithm.as_str(), b.k))
    });
    rows
}

pub fn report_csv(rows: &[BenchRow], timing: bool) -> Result<Vec<u8>, Failure> {
    let err = |e: csv::Error| Failure::usage(e.to_string());
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(BENCH_HEADER).map_err(err)?;
    for row in rows {
        w.write_record(row.record(timing)).map_err(err)?;
    }
    w.into_inner().map_err(|e| Failure::usage(e.to_string()))
}

/// Per-algorithm run counts and min/mean oracle ratio.
pub fn summary(rows: &[BenchRow]) -> String {
    #[derive(Default)]
    struct Agg {
        runs: usize,
        failed: usize,
        ratios: Vec<(f64, String)>,
    }
    let mut by_algo: BTreeMap<&str, Agg> = BTreeMap::new();
    for row in rows {
        let agg = by_algo.entry(row.algorithm.as_str()).or_default();
        agg.runs += 1;
        agg.failed += usize::from(row.outcome.is_err());
        if let Some((text, value)) = &row.ratio {
            agg.ratios.push((*value, text.clone()));
        }
    }
    let mut out = format!(
        "{:<10} {:>6} {:>7} {:>6} {:>14} {:>11}\n",
        "algorithm", "runs", "failed", "rated", "min_ratio", "mean_ratio"
    );
    for (algo, agg) in &by_algo {
        let (min, mean) = if agg.ratios.is_empty() {
            ("-".to_string(), "-".to_string())
        } else {
            let min = agg
                .ratios
                .iter()
                .min_by(|a, b| a.0.total_cmp(&b.0))
                .map(|r| r.1.clone())
                .unwrap_or_default();
            let mean = agg.ratios.iter().map(|r| r.0).sum::<f64>() / agg.ratios.len() as f64;
            (min, format!("{mean:.6}"))
        };
        let _ = writeln!(
            out,
            "{:<10} {:>6} {:>7} {:>6} {:>14} {:>11}",
            algo,
            agg.runs,
            agg.failed,
            agg.ratios.len(),
            min,
            mean
        );
    }
    out
}

pub(crate) fn cmd_bench(
    args: &BenchArgs,
    stdout: &mut dyn Write,
    stderr: &mut dyn Write,
) -> CmdResult {
    let m = ptas_m(Some(args.m), args.epsilon)?.unwrap_or(args.m);
    let instances = match (&args.instances, &args.n) {
        (Some(dir), _) => load_dir(dir, args.scale.unwrap_or(DEFAULT_SCALE), args.header)?,
        (None, Some(sizes)) => generate_sweep(args, &sizes.0)?,
        (None, None) => return Err(Failure::usage("give --instances or --n")),
    };
    let rows = match args.threads {
        Some(t) => rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build()
            .map_err(|e| Failure::usage(e.to_string()))?
            .install(|| run_all(&instances, args, m)),
        None => run_all(&instances, args, m),
    };
    let csv = report_csv(&rows, args.timing)?;
    emit(args.output.as_deref(), &csv, stdout)?;
    let table = summary(&rows);
    let written = if args.output.is_some() {
        stdout.write_all(table.as_bytes())
    } else {
        stderr.write_all(table.as_bytes())
    };
    written.map_err(|e| Failure::usage(e.to_string()))
}
