//! Instance and solution formats.
//!
//! CSV instances hold one point per line as comma-separated decimals. JSON
//! instances look like `{"dim": 2, "points": [[0.5, 1], [3, 4]]}`. Decimal
//! coordinates are scaled by `10^scale` and rounded half to even on the way
//! in, so every weight computed afterwards is in those scaled units.

mod decimal;
mod generate;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use serde_json::{json, Number, Value};

pub use decimal::{format_scaled, scale_decimal, ScaledDecimal, DEFAULT_SCALE, MAX_SCALE};
pub use generate::{generate_instance, Distribution, InstanceSpec};

use crate::error::{Error, Result};
use crate::geometry::{Metric, PointSet};
use crate::ptas::CellConfig;
use crate::solution::Solution;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Format {
    Csv,
    Json,
}

impl FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            other => Err(Error::InvalidParameter(format!(
                "unknown format {other:?} (expected csv|json)"
            ))),
        }
    }
}

impl fmt::Display for Format {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Format::Csv => "csv",
            Format::Json => "json",
        })
    }
}

impl Format {
    /// Guesses the format from a file extension.
    pub fn from_path(path: &std::path::Path) -> Option<Self> {
        path.extension()?.to_str()?.parse().ok()
    }
}

pub fn parse_instance(bytes: &[u8], format: Format, scale: u32) -> Result<PointSet> {
    match format {
        Format::Csv => parse_csv_instance(bytes, scale, false),
        Format::Json => parse_json_instance(bytes, scale),
    }
}

fn at_line(line: usize, e: Error) -> Error {
    match e {
        Error::Parse { message, .. } => Error::Parse { line, message },
        other => other,
    }
}

/// CSV instance; when `header` is set the first line is skipped. Blank lines
/// are ignored.
pub fn parse_csv_instance(bytes: &[u8], scale: u32, header: bool) -> Result<PointSet> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(header)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(bytes);
    let mut dim = None;
    let mut coords = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line() as usize);
            Error::parse(line, e.to_string())
        })?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        if record.iter().all(str::is_empty) {
            continue;
        }
        let expected = *dim.get_or_insert(record.len());
        if record.len() != expected {
            return Err(at_line(
                line,
                Error::parse(
                    0,
                    format!("expected {expected} fields, found {}", record.len()),
                ),
            ));
        }
        for field in record.iter() {
            coords.push(scale_decimal(field, scale).map_err(|e| at_line(line, e))?);
        }
    }
    match dim {
        None => Err(Error::EmptyInput),
        Some(d) => PointSet::from_flat(d, coords),
    }
}

fn parse_json_instance(bytes: &[u8], scale: u32) -> Result<PointSet> {
    let value: Value =
        serde_json::from_slice(bytes).map_err(|e| Error::parse(e.line(), e.to_string()))?;
    let dim = value
        .get("dim")
        .and_then(Value::as_u64)
        .ok_or_else(|| Error::parse(0, "missing or invalid \"dim\""))? as usize;
    let points = value
        .get("points")
        .and_then(Value::as_array)
        .ok_or_else(|| Error::parse(0, "missing \"points\" array"))?;
    if points.is_empty() {
        return Err(Error::EmptyInput);
    }
    let mut coords = Vec::with_capacity(points.len() * dim);
    for (i, p) in points.iter().enumerate() {
        let row = p
            .as_array()
            .ok_or_else(|| Error::parse(0, format!("point {i} is not an array")))?;
        if row.len() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: row.len(),
            });
        }
        for c in row {
            let Value::Number(num) = c else {
                return Err(Error::parse(
                    0,
                    format!("point {i}: non-numeric coordinate {c}"),
                ));
            };
            coords.push(scale_decimal(&num.to_string(), scale)?);
        }
    }
    PointSet::from_flat(dim, coords)
}

/// Writes `points` so that parsing with the same `scale` reproduces them.
pub fn write_instance(points: &PointSet, format: Format, scale: u32) -> Result<Vec<u8>> {
    match format {
        Format::Csv => {
            let mut out = String::new();
            for p in points.iter() {
                let row: Vec<String> = p.iter().map(|&c| format_scaled(c, scale)).collect();
                out.push_str(&row.join(","));
                out.push('\n');
            }
            Ok(out.into_bytes())
        }
        Format::Json => {
            let rows = points
                .iter()
                .map(|p| {
                    p.iter()
                        .map(|&c| {
                            format_scaled(c, scale)
                                .parse::<Number>()
                                .map(Value::Number)
                                .map_err(|e| Error::Serialization(e.to_string()))
                        })
                        .collect::<Result<Vec<_>>>()
                        .map(Value::Array)
                })
                .collect::<Result<Vec<_>>>()?;
            let doc = json!({ "dim": points.dim(), "points": rows });
            let mut out =
                serde_json::to_vec(&doc).map_err(|e| Error::Serialization(e.to_string()))?;
            out.push(b'\n');
            Ok(out)
        }
    }
}

/// Serialized statistics of a solution.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ReportStats {
    pub candidates: usize,
    pub subsets_evaluated: u64,
    pub configurations: u64,
    pub swaps: u64,
    pub elapsed_us: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub m: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bound_fraction: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ptas_config: Option<CellConfig>,
    /// Decimal scale of the instance the weight is expressed in.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub scale: Option<u32>,
}

/// The on-disk form of a [`Solution`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolutionReport {
    pub algorithm: String,
    pub metric: String,
    pub k: usize,
    pub indices: Vec<usize>,
    /// Exact decimal integer for l1/linf (linf already halved), or a real
    /// with 12 significant digits for l2.
    pub weight: String,
    pub stats: ReportStats,
}

impl From<&Solution> for SolutionReport {
    fn from(sol: &Solution) -> Self {
        let ptas = sol.stats.ptas.as_ref();
        SolutionReport {
            algorithm: sol.algorithm.to_string(),
            metric: sol.metric.to_string(),
            k: sol.k(),
            indices: sol.indices.clone(),
            weight: sol.reported_weight(),
            stats: ReportStats {
                candidates: sol.stats.candidates,
                subsets_evaluated: sol.stats.subsets_evaluated,
                configurations: sol.stats.configurations,
                swaps: sol.stats.swaps,
                elapsed_us: sol.stats.elapsed.as_micros() as u64,
                m: ptas.map(|p| p.m),
                bound_fraction: ptas.map(|p| p.bound_fraction.to_string()),
                ptas_config: ptas.map(|p| p.config.clone()),
                scale: None,
            },
        }
    }
}

impl SolutionReport {
    pub fn metric(&self) -> Result<Metric> {
        self.metric.parse()
    }
}

const CSV_SOLUTION_HEADER: [&str; 12] = [
    "algorithm",
    "metric",
    "k",
    "weight",
    "indices",
    "candidates",
    "subsets_evaluated",
    "configurations",
    "swaps",
    "elapsed_us",
    "m",
    "bound_fraction",
];

pub fn write_solution(sol: &Solution, format: Format) -> Result<Vec<u8>> {
    write_report(&SolutionReport::from(sol), format)
}

/// JSON output is one pretty-printed object. CSV output is a header line
/// and one row with space-separated indices; it omits the PTAS cell
/// configuration and the scale.
pub fn write_report(report: &SolutionReport, format: Format) -> Result<Vec<u8>> {
    let ser = |e: &dyn fmt::Display| Error::Serialization(e.to_string());
    match format {
        Format::Json => {
            let mut out = serde_json::to_vec_pretty(report).map_err(|e| ser(&e))?;
            out.push(b'\n');
            Ok(out)
        }
        Format::Csv => {
            let s = &report.stats;
            let indices: Vec<String> = report.indices.iter().map(usize::to_string).collect();
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(CSV_SOLUTION_HEADER).map_err(|e| ser(&e))?;
            w.write_record([
                report.algorithm.clone(),
                report.metric.clone(),
                report.k.to_string(),
                report.weight.clone(),
                indices.join(" "),
                s.candidates.to_string(),
                s.subsets_evaluated.to_string(),
                s.configurations.to_string(),
                s.swaps.to_string(),
                s.elapsed_us.to_string(),
                s.m.map(|m| m.to_string()).unwrap_or_default(),
                s.bound_fraction.clone().unwrap_or_default(),
            ])
            .map_err(|e| ser(&e))?;
            w.into_inner().map_err(|e| ser(&e))
        }
    }
}

pub fn parse_solution(bytes: &[u8], format: Format) -> Result<SolutionReport> {
    match format {
        Format::Json => {
            serde_json::from_slice(bytes).map_err(|e| Error::parse(e.line(), e.to_string()))
        }
        Format::Csv => {
            let mut r = csv::ReaderBuilder::new().from_reader(bytes);
            let header = r
                .headers()
                .map_err(|e| Error::parse(1, e.to_string()))?
                .clone();
            if header.iter().ne(CSV_SOLUTION_HEADER) {
                return Err(Error::parse(1, "unexpected solution header"));
            }
            let row = r
                .records()
                .next()
                .ok_or(Error::EmptyInput)?
                .map_err(|e| Error::parse(2, e.to_string()))?;
            let num = |i: usize| -> Result<u64> {
                row[i].parse().map_err(|_| {
                    Error::parse(2, format!("bad {} {:?}", CSV_SOLUTION_HEADER[i], &row[i]))
                })
            };
            let indices = row[4]
                .split_whitespace()
                .map(|t| {
                    t.parse()
                        .map_err(|_| Error::parse(2, format!("bad index {t:?}")))
                })
                .collect::<Result<Vec<usize>>>()?;
            Ok(SolutionReport {
                algorithm: row[0].to_string(),
                metric: row[1].to_string(),
                k: num(2)? as usize,
                weight: row[3].to_string(),
                indices,
                stats: ReportStats {
                    candidates: num(5)? as usize,
                    subsets_evaluated: num(6)?,
                    configurations: num(7)?,
                    swaps: num(8)?,
                    elapsed_us: num(9)?,
                    m: (!row[10].is_empty())
                        .then(|| num(10))
                        .transpose()?
                        .map(|m| m as usize),
                    bound_fraction: (!row[11].is_empty()).then(|| row[11].to_string()),
                    ptas_config: None,
                    scale: None,
                },
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{subset_weight, Weight};
    use crate::solution::{Algorithm, SolveStats};
    use proptest::prelude::*;

    #[test]
    fn csv_examples() {
        let p = parse_instance(b"0,0\n1,2\n", Format::Csv, 0).unwrap();
        assert_eq!(p.to_rows(), vec![vec![0, 0], vec![1, 2]]);
        let p = parse_instance(b"0.5,1.25\n", Format::Csv, 2).unwrap();
        assert_eq!(p.to_rows(), vec![vec![50, 125]]);
        let p = parse_csv_instance(b"x,y\n3, 4\n\n5,6\n", 0, true).unwrap();
        assert_eq!(p.to_rows(), vec![vec![3, 4], vec![5, 6]]);
    }

    #[test]
    fn csv_errors() {
        assert!(matches!(
            parse_instance(b"0,0\n1,2,3\n", Format::Csv, 0),
            Err(Error::Parse { line: 2, .. })
        ));
        assert!(matches!(
            parse_instance(b"0,0\n1,zz\n", Format::Csv, 0),
            Err(Error::Parse { line: 2, .. })
        ));
        assert_eq!(parse_instance(b"", Format::Csv, 0), Err(Error::EmptyInput));
        assert_eq!(
            parse_instance(b"\n\n", Format::Csv, 0),
            Err(Error::EmptyInput)
        );
        assert!(matches!(
            parse_instance(b"99999999999,0\n", Format::Csv, 4),
            Err(Error::CoordinateOverflow { .. })
        ));
    }

    #[test]
    fn json_examples() {
        let p = parse_instance(br#"{"dim":2,"points":[[3,4]]}"#, Format::Json, 0).unwrap();
        assert_eq!(p.to_rows(), vec![vec![3, 4]]);
        let p = parse_instance(br#"{"dim":1,"points":[[0.1],[2.5e-1]]}"#, Format::Json, 4).unwrap();
        assert_eq!(p.to_rows(), vec![vec![1000], vec![2500]]);
        assert!(parse_instance(br#"{"dim":2,"points":[[3]]}"#, Format::Json, 0).is_err());
        assert!(parse_instance(br#"{"dim":2,"points":[]}"#, Format::Json, 0).is_err());
        assert!(parse_instance(br#"{"dim":1,"points":[["a"]]}"#, Format::Json, 0).is_err());
        assert!(parse_instance(b"{", Format::Json, 0).is_err());
    }

    fn solution(metric: Metric, indices: Vec<usize>, weight: Weight) -> Solution {
        Solution {
            algorithm: Algorithm::FixedK,
            metric,
            indices,
            weight,
            stats: SolveStats::default(),
        }
    }

    #[test]
    fn solution_weights() {
        let single = solution(Metric::L1, vec![3], Weight::Exact(0));
        assert_eq!(SolutionReport::from(&single).weight, "0");
        let linf = solution(Metric::Linf, vec![0, 1], Weight::Exact(14));
        assert_eq!(SolutionReport::from(&linf).weight, "7");

        let p = PointSet::new(2, vec![vec![0, 0], vec![2, 1], vec![3, 3], vec![5, 0]]).unwrap();
        let w = subset_weight(&p, &[0, 1, 2, 3], Metric::L1).unwrap();
        let s = solution(Metric::L1, vec![0, 1, 2, 3], w);
        let bytes = write_solution(&s, Format::Json).unwrap();
        let v: Value = serde_json::from_slice(&bytes).unwrap();
        assert_eq!(v["weight"], "26");
        assert_eq!(v["k"], 4);
        assert_eq!(v["algorithm"], "fixed-k");
        assert_eq!(v["metric"], "l1");
    }

    #[test]
    fn solution_round_trips() {
        let s = solution(
            Metric::L2,
            vec![1, 4, 9],
            Weight::Approx(1234.5678901234567),
        );
        for format in [Format::Json, Format::Csv] {
            let report = parse_solution(&write_solution(&s, format).unwrap(), format).unwrap();
            assert_eq!(report, SolutionReport::from(&s));
            assert_eq!(report.weight, "1234.56789012");
        }
    }

    proptest! {
        #[test]
        fn instance_round_trip(
            rows in prop::collection::vec(prop::collection::vec(-1_000_000_000i64..1_000_000_000, 3), 1..20),
            scale in 0u32..6,
        ) {
            let p = PointSet::new(3, rows).unwrap();
            for format in [Format::Csv, Format::Json] {
                let bytes = write_instance(&p, format, scale).unwrap();
                prop_assert_eq!(&parse_instance(&bytes, format, scale).unwrap(), &p);
            }
        }
    }
}
