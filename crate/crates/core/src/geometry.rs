//! Integer point sets, rectilinear weights and directional selection.
//!
//! Coordinates are `i64` values bounded in magnitude by [`COORD_BOUND`];
//! every distance and weight is accumulated in `i128` so L1 and L∞ results
//! are exact. Euclidean weights are the only floating point quantities and
//! are used for reporting, never for selection.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest admissible coordinate magnitude (2^40).
pub const COORD_BOUND: i64 = 1 << 40;

/// Checks a coordinate against [`COORD_BOUND`].
pub fn check_coordinate(value: i128) -> Result<i64> {
    if value.abs() > COORD_BOUND as i128 {
        return Err(Error::CoordinateOverflow { value });
    }
    Ok(value as i64)
}

/// An ordered set of `n >= 1` points of common dimension, stored row-major.
///
/// Point `i` is identified by its position; duplicates are allowed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PointSet {
    dim: usize,
    coords: Vec<i64>,
}

impl PointSet {
    pub fn new(dim: usize, points: Vec<Vec<i64>>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidParameter("dimension must be positive".into()));
        }
        if points.is_empty() {
            return Err(Error::EmptyInput);
        }
        let mut coords = Vec::with_capacity(dim * points.len());
        for p in &points {
            if p.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: p.len(),
                });
            }
            for &c in p {
                check_coordinate(c as i128)?;
            }
            coords.extend_from_slice(p);
        }
        Ok(Self { dim, coords })
    }

    /// Builds a point set from a flat row-major coordinate buffer.
    pub fn from_flat(dim: usize, coords: Vec<i64>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidParameter("dimension must be positive".into()));
        }
        if coords.is_empty() {
            return Err(Error::EmptyInput);
        }
        if !coords.len().is_multiple_of(dim) {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: coords.len() % dim,
            });
        }
        for &c in &coords {
            check_coordinate(c as i128)?;
        }
        Ok(Self { dim, coords })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.coords.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    #[inline]
    pub fn point(&self, i: usize) -> &[i64] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    pub fn iter(&self) -> impl ExactSizeIterator<Item = &[i64]> + '_ {
        self.coords.chunks_exact(self.dim)
    }

    pub fn to_rows(&self) -> Vec<Vec<i64>> {
        self.iter().map(<[i64]>::to_vec).collect()
    }

    /// Adds `offset` to every point.
    pub fn translated(&self, offset: &[i64]) -> Result<Self> {
        self.check_dim(offset.len())?;
        let rows = self
            .iter()
            .map(|p| {
                p.iter()
                    .zip(offset)
                    .map(|(&a, &b)| check_coordinate(a as i128 + b as i128))
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(self.dim, rows)
    }

    /// Multiplies every coordinate by `factor`.
    pub fn scaled(&self, factor: i64) -> Result<Self> {
        let coords = self
            .coords
            .iter()
            .map(|&c| check_coordinate(c as i128 * factor as i128))
            .collect::<Result<Vec<_>>>()?;
        Self::from_flat(self.dim, coords)
    }

    fn check_dim(&self, found: usize) -> Result<()> {
        if found != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found,
            });
        }
        Ok(())
    }

    /// Validates that `subset` holds distinct in-range indices.
    pub fn check_subset(&self, subset: &[usize]) -> Result<()> {
        if subset.is_empty() {
            return Err(Error::EmptySubset);
        }
        let n = self.len();
        let mut seen = vec![false; n];
        for &i in subset {
            if i >= n {
                return Err(Error::IndexOutOfRange { index: i, len: n });
            }
            if std::mem::replace(&mut seen[i], true) {
                return Err(Error::DuplicateIndex(i));
            }
        }
        Ok(())
    }
}

/// An integer direction vector. The zero vector is allowed and ranks all
/// points equally.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Direction(Vec<i64>);

impl Direction {
    pub fn new(components: Vec<i64>) -> Self {
        Self(components)
    }

    pub fn components(&self) -> &[i64] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&c| c == 0)
    }

    pub fn scaled(&self, factor: i64) -> Self {
        Self(self.0.iter().map(|c| c * factor).collect())
    }
}

impl From<Vec<i64>> for Direction {
    fn from(v: Vec<i64>) -> Self {
        Self(v)
    }
}

/// Distance function used to score a subset.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Metric {
    L1,
    Linf,
    /// Euclidean weight of a selection made under L1.
    L2,
}

impl Metric {
    pub fn as_str(self) -> &'static str {
        match self {
            Metric::L1 => "l1",
            Metric::Linf => "linf",
            Metric::L2 => "l2",
        }
    }

    /// LINF and L2 are planar only.
    pub fn check_dim(self, dim: usize) -> Result<()> {
        match self {
            Metric::L1 => Ok(()),
            Metric::Linf | Metric::L2 if dim == 2 => Ok(()),
            _ => Err(Error::UnsupportedMetric { metric: self, dim }),
        }
    }

    /// Whether weights under this metric are exact integers.
    pub fn is_exact(self) -> bool {
        !matches!(self, Metric::L2)
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Metric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "l1" => Ok(Metric::L1),
            "linf" => Ok(Metric::Linf),
            "l2" => Ok(Metric::L2),
            other => Err(Error::InvalidParameter(format!(
                "unknown metric {other:?} (expected l1|linf|l2)"
            ))),
        }
    }
}

/// Weight of a subset.
///
/// Under LINF the exact value is stored doubled (the L1 weight after
/// rotation); [`Weight::reported`] undoes that.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Weight {
    Exact(i128),
    Approx(f64),
}

impl Weight {
    pub fn exact(self) -> Option<i128> {
        match self {
            Weight::Exact(w) => Some(w),
            Weight::Approx(_) => None,
        }
    }

    pub fn as_f64(self) -> f64 {
        match self {
            Weight::Exact(w) => w as f64,
            Weight::Approx(w) => w,
        }
    }

    /// Weight in the metric's own units as a decimal string.
    pub fn reported(self, metric: Metric) -> String {
        match (self, metric) {
            (Weight::Exact(w), Metric::Linf) => {
                debug_assert!(w % 2 == 0, "rotated L-infinity weight must be even");
                (w / 2).to_string()
            }
            (Weight::Exact(w), _) => w.to_string(),
            (Weight::Approx(w), _) => format_significant(w, 12),
        }
    }
}

/// Formats `x` in plain decimal notation with `digits` significant digits.
pub fn format_significant(x: f64, digits: usize) -> String {
    if x == 0.0 || !x.is_finite() {
        return if x.is_finite() {
            "0".into()
        } else {
            x.to_string()
        };
    }
    let magnitude = x.abs().log10().floor() as i64;
    let decimals = (digits as i64 - 1 - magnitude).max(0) as usize;
    format!("{x:.decimals$}")
}

fn check_pair(p: &[i64], q: &[i64]) -> Result<()> {
    if p.len() != q.len() {
        return Err(Error::DimensionMismatch {
            expected: p.len(),
            found: q.len(),
        });
    }
    Ok(())
}

#[inline]
pub(crate) fn l1_raw(p: &[i64], q: &[i64]) -> i128 {
    p.iter()
        .zip(q)
        .map(|(&a, &b)| (a as i128 - b as i128).abs())
        .sum()
}

#[inline]
pub(crate) fn l2_raw(p: &[i64], q: &[i64]) -> f64 {
    p.iter()
        .zip(q)
        .map(|(&a, &b)| {
            let d = (a as i128 - b as i128) as f64;
            d * d
        })
        .sum::<f64>()
        .sqrt()
}

pub fn l1_distance(p: &[i64], q: &[i64]) -> Result<i128> {
    check_pair(p, q)?;
    Ok(l1_raw(p, q))
}

pub fn linf_distance(p: &[i64], q: &[i64]) -> Result<i128> {
    check_pair(p, q)?;
    Ok(p.iter()
        .zip(q)
        .map(|(&a, &b)| (a as i128 - b as i128).abs())
        .max()
        .unwrap_or(0))
}

pub fn l2_distance(p: &[i64], q: &[i64]) -> Result<f64> {
    check_pair(p, q)?;
    Ok(l2_raw(p, q))
}

#[inline]
pub(crate) fn dot_raw(p: &[i64], c: &[i64]) -> i128 {
    p.iter().zip(c).map(|(&a, &b)| a as i128 * b as i128).sum()
}

pub fn inner_product(p: &[i64], c: &Direction) -> Result<i128> {
    check_pair(p, c.components())?;
    Ok(dot_raw(p, c.components()))
}

/// Sum of pairwise absolute differences of `values`, via the sorted
/// coefficient form `sum_i (2i + 1 - k) * x_(i)`. Sorts in place.
pub(crate) fn pairwise_abs_sum(values: &mut [i64]) -> i128 {
    values.sort_unstable();
    let k = values.len() as i128;
    values
        .iter()
        .enumerate()
        .map(|(i, &x)| (2 * i as i128 + 1 - k) * x as i128)
        .sum()
}

/// Exact L1 weight of `subset` without validation.
pub(crate) fn l1_weight_raw(points: &PointSet, subset: &[usize]) -> i128 {
    let mut axis = vec![0i64; subset.len()];
    (0..points.dim())
        .map(|a| {
            for (slot, &i) in axis.iter_mut().zip(subset) {
                *slot = points.point(i)[a];
            }
            pairwise_abs_sum(&mut axis)
        })
        .sum()
}

/// Euclidean weight of `subset` summed in ascending index order.
pub(crate) fn l2_weight_raw(points: &PointSet, subset: &[usize]) -> f64 {
    let mut sorted = subset.to_vec();
    sorted.sort_unstable();
    let mut total = 0.0;
    for (a, &i) in sorted.iter().enumerate() {
        for &j in &sorted[a + 1..] {
            total += l2_raw(points.point(i), points.point(j));
        }
    }
    total
}

/// Sum of pairwise distances of the points in `subset`.
///
/// L1 uses the per-axis sorted-coefficient identity. LINF returns twice the
/// L∞ weight (the L1 weight of the rotated points). L2 returns the Euclidean
/// pair sum.
pub fn subset_weight(points: &PointSet, subset: &[usize], metric: Metric) -> Result<Weight> {
    points.check_subset(subset)?;
    metric.check_dim(points.dim())?;
    Ok(match metric {
        Metric::L1 => Weight::Exact(l1_weight_raw(points, subset)),
        Metric::Linf => {
            let mut sums = vec![0i64; subset.len()];
            let mut diffs = vec![0i64; subset.len()];
            for (slot, &i) in subset.iter().enumerate() {
                let p = points.point(i);
                sums[slot] = p[0] + p[1];
                diffs[slot] = p[0] - p[1];
            }
            Weight::Exact(pairwise_abs_sum(&mut sums) + pairwise_abs_sum(&mut diffs))
        }
        Metric::L2 => Weight::Approx(l2_weight_raw(points, subset)),
    })
}

/// Orders `a` before `b` when `a` is higher in direction `c`, then by index.
#[inline]
fn rank_cmp(a: (i128, usize), b: (i128, usize)) -> Ordering {
    b.0.cmp(&a.0).then(a.1.cmp(&b.1))
}

/// Indices of the `k` points maximal in direction `c`, ties broken by
/// smaller index, returned in ascending index order.
///
/// Uses selection rather than a full sort, so the cost is linear in `n`.
pub fn directional_topk(points: &PointSet, c: &Direction, k: usize) -> Result<Vec<usize>> {
    let all: Vec<usize> = (0..points.len()).collect();
    directional_topk_among(points, &all, c, k)
}

/// [`directional_topk`] restricted to the points listed in `candidates`.
pub fn directional_topk_among(
    points: &PointSet,
    candidates: &[usize],
    c: &Direction,
    k: usize,
) -> Result<Vec<usize>> {
    points.check_dim(c.dim())?;
    if k > candidates.len() {
        return Err(Error::InvalidK {
            k,
            n: candidates.len(),
            min: 0,
        });
    }
    if let Some(&bad) = candidates.iter().find(|&&i| i >= points.len()) {
        return Err(Error::IndexOutOfRange {
            index: bad,
            len: points.len(),
        });
    }
    if k == 0 {
        return Ok(Vec::new());
    }
    let mut keyed: Vec<(i128, usize)> = candidates
        .iter()
        .map(|&i| (dot_raw(points.point(i), c.components()), i))
        .collect();
    if k < keyed.len() {
        keyed.select_nth_unstable_by(k - 1, |&a, &b| rank_cmp(a, b));
        keyed.truncate(k);
    }
    let mut out: Vec<usize> = keyed.into_iter().map(|(_, i)| i).collect();
    out.sort_unstable();
    Ok(out)
}

/// All point indices ordered from highest to lowest in direction `c`, ties by
/// index. Any prefix of length `k` equals `directional_topk(.., k)` as a set.
pub(crate) fn directional_order(points: &PointSet, c: &[i64]) -> Vec<usize> {
    let mut keyed: Vec<(i128, usize)> = points
        .iter()
        .enumerate()
        .map(|(i, p)| (dot_raw(p, c), i))
        .collect();
    keyed.sort_unstable_by(|&a, &b| rank_cmp(a, b));
    keyed.into_iter().map(|(_, i)| i).collect()
}

/// Maps `(x, y)` to `(x + y, x - y)`.
///
/// L1 distances after the map are exactly twice the L∞ distances before it.
pub fn rotate_linf_to_l1(points: &PointSet) -> Result<PointSet> {
    Metric::Linf.check_dim(points.dim())?;
    let mut coords = Vec::with_capacity(points.len() * 2);
    for p in points.iter() {
        let (x, y) = (p[0] as i128, p[1] as i128);
        coords.push(check_coordinate(x + y)?);
        coords.push(check_coordinate(x - y)?);
    }
    PointSet::from_flat(2, coords)
}
