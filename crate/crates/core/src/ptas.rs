//! Approximation scheme for variable k in the plane.
//!
//! Each axis is cut into `m` strips by positions in the axis rank order
//! (points sorted by coordinate, then index), so every point lands in
//! exactly one of the `m x m` cells. For every choice of cuts, strip quotas
//! and per-cell counts `K[i][j]`, cell `(i, j)` contributes its `K[i][j]`
//! points maximal in direction `(2i + 1 - m, 2j + 1 - m)`. The heaviest
//! union over all configurations is returned.
//!
//! When `m` divides `k` the result weighs at least `(1 - f(m))` times the
//! optimum, with `f(m) = (5m - 9) / (2 (m - 1)(m - 2))`.

use std::borrow::Cow;
use std::collections::HashMap;
use std::fmt;
use std::ops::ControlFlow;
use std::time::Instant;

use num_rational::Ratio;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{
    directional_order, l1_weight_raw, l2_weight_raw, rotate_linf_to_l1, Direction, Metric,
    PointSet, Weight,
};
use crate::search::{binomial, SearchLimits};
use crate::solution::{Algorithm, PtasReport, Solution, SolveStats};

/// Default cap on the number of PTAS configurations.
pub const DEFAULT_CONFIG_BUDGET: u64 = 1_000_000_000;

/// The exact loss fraction `f(m)`, kept in lowest terms.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct BoundFraction(Ratio<i64>);

impl BoundFraction {
    pub fn numer(&self) -> i64 {
        *self.0.numer()
    }

    pub fn denom(&self) -> i64 {
        *self.0.denom()
    }

    pub fn ratio(&self) -> Ratio<i64> {
        self.0
    }

    /// The guaranteed fraction of the optimum, `1 - f(m)`.
    pub fn guarantee(&self) -> Ratio<i64> {
        Ratio::from_integer(1) - self.0
    }

    /// Exact check of `heuristic >= (1 - f) * optimum`.
    pub fn is_satisfied_by(&self, heuristic: i128, optimum: i128) -> bool {
        let (num, den) = (self.numer() as i128, self.denom() as i128);
        heuristic * den >= (den - num) * optimum
    }
}

impl fmt::Display for BoundFraction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.numer(), self.denom())
    }
}

pub fn bound_fraction(m: usize) -> Result<BoundFraction> {
    if m < 3 {
        return Err(Error::InvalidParameter(format!(
            "m must be at least 3, got {m}"
        )));
    }
    let m = i64::try_from(m).map_err(|_| Error::InvalidParameter("m too large".into()))?;
    Ok(BoundFraction(Ratio::new(5 * m - 9, 2 * (m - 1) * (m - 2))))
}

/// Smallest `m >= 4` whose guarantee is within `1 + epsilon`, i.e.
/// `f(m) <= epsilon / (1 + epsilon)`. Exact rational arithmetic.
pub fn choose_m(epsilon: Ratio<i64>) -> Result<usize> {
    if epsilon <= Ratio::from_integer(0) {
        return Err(Error::InvalidParameter(format!(
            "epsilon must be positive, got {epsilon}"
        )));
    }
    let (p, q) = (*epsilon.numer() as i128, *epsilon.denom() as i128);
    let mut m: i128 = 4;
    // f(m) (1 + eps) <= eps  <=>  (5m - 9)(q + p) <= 2 (m - 1)(m - 2) p
    while (5 * m - 9) * (q + p) > 2 * (m - 1) * (m - 2) * p {
        m += 1;
    }
    Ok(m as usize)
}

/// Nondecreasing cut tuples `(s_1, .., s_{m-1})` with `0 <= s_i <= n`, in
/// lexicographic order. There are `C(n + m - 1, m - 1)` of them.
#[derive(Debug, Clone)]
pub struct SplitTuples {
    n: usize,
    next: Option<Vec<usize>>,
}

impl SplitTuples {
    fn new(n: usize, cuts: usize) -> Self {
        Self {
            n,
            next: Some(vec![0; cuts]),
        }
    }
}

impl Iterator for SplitTuples {
    type Item = Vec<usize>;

    fn next(&mut self) -> Option<Vec<usize>> {
        let current = self.next.take()?;
        if let Some(p) = current.iter().rposition(|&s| s < self.n) {
            let mut succ = current.clone();
            let v = succ[p] + 1;
            succ[p..].fill(v);
            self.next = Some(succ);
        }
        Some(current)
    }
}

pub fn enumerate_splits(n: usize, m: usize) -> Result<SplitTuples> {
    if m < 3 {
        return Err(Error::InvalidParameter(format!(
            "m must be at least 3, got {m}"
        )));
    }
    Ok(SplitTuples::new(n, m - 1))
}

/// Admissible per-strip quota vectors: `(k/m, .., k/m)` when `m | k`,
/// otherwise every vector over `{floor(k/m), ceil(k/m)}` summing to `k`.
pub fn strip_quotas(k: usize, m: usize) -> Result<Vec<Vec<usize>>> {
    if m < 3 {
        return Err(Error::InvalidParameter(format!(
            "m must be at least 3, got {m}"
        )));
    }
    if k < m {
        return Err(Error::InvalidParameter(format!(
            "k={k} is smaller than m={m}"
        )));
    }
    let (base, extra) = (k / m, k % m);
    let mut out = Vec::new();
    // choose which `extra` strips get one more point, lexicographically
    let mut picks: Vec<usize> = (0..extra).collect();
    loop {
        let mut q = vec![base; m];
        for &p in &picks {
            q[p] += 1;
        }
        out.push(q);
        let Some(pos) = (0..extra).rev().find(|&i| picks[i] < m - extra + i) else {
            return Ok(out);
        };
        picks[pos] += 1;
        for i in pos + 1..extra {
            picks[i] = picks[i - 1] + 1;
        }
    }
}

/// `counts[i][j]`: points taken from x-strip `i` and y-strip `j`.
pub type CountMatrix = Vec<Vec<usize>>;

/// Every nonnegative integer matrix with row `i` summing to
/// `col_quotas[i]` (the x-strip quotas) and column `j` summing to
/// `row_quotas[j]` (the y-strip quotas), with entries bounded by
/// `capacities` when given. Deterministic order.
pub fn enumerate_count_matrices(
    col_quotas: &[usize],
    row_quotas: &[usize],
    capacities: Option<&[Vec<usize>]>,
) -> Vec<CountMatrix> {
    let mut out = Vec::new();
    let _ = for_each_count_matrix(col_quotas, row_quotas, capacities, |k| {
        out.push(k.to_vec());
        ControlFlow::<()>::Continue(())
    });
    out
}

/// Visitor form of [`enumerate_count_matrices`]; stops when `visit` breaks.
pub fn for_each_count_matrix<B>(
    col_quotas: &[usize],
    row_quotas: &[usize],
    capacities: Option<&[Vec<usize>]>,
    mut visit: impl FnMut(&[Vec<usize>]) -> ControlFlow<B>,
) -> ControlFlow<B> {
    let (w, h) = (col_quotas.len(), row_quotas.len());
    if col_quotas.iter().sum::<usize>() != row_quotas.iter().sum::<usize>() {
        return ControlFlow::Continue(());
    }
    if let Some(c) = capacities {
        assert!(
            c.len() == w && c.iter().all(|r| r.len() == h),
            "capacity shape mismatch"
        );
    }
    let mut gen = MatrixGen {
        w,
        h,
        caps: capacities,
        colrem: col_quotas.to_vec(),
        rowrem: row_quotas.to_vec(),
        k: vec![vec![0; h]; w],
    };
    gen.fill(0, &mut visit)
}

struct MatrixGen<'a> {
    w: usize,
    h: usize,
    caps: Option<&'a [Vec<usize>]>,
    colrem: Vec<usize>,
    rowrem: Vec<usize>,
    k: Vec<Vec<usize>>,
}

impl MatrixGen<'_> {
    fn cap(&self, i: usize, j: usize) -> usize {
        self.caps.map_or(usize::MAX, |c| c[i][j])
    }

    fn fill<B>(
        &mut self,
        pos: usize,
        visit: &mut impl FnMut(&[Vec<usize>]) -> ControlFlow<B>,
    ) -> ControlFlow<B> {
        if pos == self.w * self.h {
            return visit(&self.k);
        }
        let (i, j) = (pos / self.h, pos % self.h);
        // what the rest of strip i and of strip j can still absorb
        let rest_i: usize = (j + 1..self.h)
            .map(|jj| self.rowrem[jj].min(self.cap(i, jj)))
            .sum();
        let rest_j: usize = (i + 1..self.w)
            .map(|ii| self.colrem[ii].min(self.cap(ii, j)))
            .sum();
        let hi = self.colrem[i].min(self.rowrem[j]).min(self.cap(i, j));
        let lo = self.colrem[i]
            .saturating_sub(rest_i)
            .max(self.rowrem[j].saturating_sub(rest_j));
        if lo > hi {
            return ControlFlow::Continue(());
        }
        for v in (lo..=hi).rev() {
            self.k[i][j] = v;
            self.colrem[i] -= v;
            self.rowrem[j] -= v;
            let flow = self.fill(pos + 1, visit);
            self.colrem[i] += v;
            self.rowrem[j] += v;
            flow?;
        }
        self.k[i][j] = 0;
        ControlFlow::Continue(())
    }
}

/// Number of matrices [`enumerate_count_matrices`] yields without
/// capacities, by memoised counting over strips. Saturates.
pub fn count_matrices(col_quotas: &[usize], row_quotas: &[usize]) -> u128 {
    fn strip(
        i: usize,
        cols: &[usize],
        rows: Vec<usize>,
        memo: &mut HashMap<(usize, Vec<usize>), u128>,
    ) -> u128 {
        if i + 1 == cols.len() {
            return u128::from(rows.iter().sum::<usize>() == cols[i]);
        }
        if let Some(&c) = memo.get(&(i, rows.clone())) {
            return c;
        }
        let mut total: u128 = 0;
        let mut part = vec![0; rows.len()];
        compositions(cols[i], &rows, 0, &mut part, &mut |p| {
            let rest: Vec<usize> = rows.iter().zip(p).map(|(r, v)| r - v).collect();
            total = total.saturating_add(strip(i + 1, cols, rest, memo));
        });
        memo.insert((i, rows), total);
        total
    }
    fn compositions(
        left: usize,
        bounds: &[usize],
        j: usize,
        part: &mut Vec<usize>,
        f: &mut impl FnMut(&[usize]),
    ) {
        if j + 1 == bounds.len() {
            if left <= bounds[j] {
                part[j] = left;
                f(part);
            }
            return;
        }
        for v in 0..=left.min(bounds[j]) {
            part[j] = v;
            compositions(left - v, bounds, j + 1, part, f);
        }
    }
    if col_quotas.is_empty()
        || row_quotas.is_empty()
        || col_quotas.iter().sum::<usize>() != row_quotas.iter().sum::<usize>()
    {
        return 0;
    }
    strip(0, col_quotas, row_quotas.to_vec(), &mut HashMap::new())
}

/// Selection direction of cell `(i, j)`: `(2i + 1 - m, 2j + 1 - m)`.
pub fn nabla_direction(i: usize, j: usize, m: usize) -> Direction {
    let comp = |t: usize| 2 * t as i64 + 1 - m as i64;
    Direction::new(vec![comp(i), comp(j)])
}

/// One point of the PTAS enumeration.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CellConfig {
    /// `m - 1` cut positions in the x rank order.
    pub x_splits: Vec<usize>,
    /// `m - 1` cut positions in the y rank order.
    pub y_splits: Vec<usize>,
    /// `counts[i][j]` points demanded from x-strip `i`, y-strip `j`.
    pub counts: CountMatrix,
}

impl CellConfig {
    pub fn m(&self) -> usize {
        self.x_splits.len() + 1
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PtasParams {
    /// Strips per axis.
    pub m: usize,
    pub metric: Metric,
    pub limits: SearchLimits,
}

impl PtasParams {
    pub fn new(m: usize, metric: Metric) -> Self {
        Self {
            m,
            metric,
            limits: SearchLimits::with_budget(DEFAULT_CONFIG_BUDGET),
        }
    }

    pub fn from_epsilon(epsilon: Ratio<i64>, metric: Metric) -> Result<Self> {
        Ok(Self::new(choose_m(epsilon)?, metric))
    }
}

/// Number of configurations [`solve_ptas`] enumerates before capacity
/// pruning: cut pairs times uncapacitated count matrices, summed over
/// quota vectors. Saturates.
pub fn count_configurations(n: usize, k: usize, m: usize) -> Result<u128> {
    if k > n {
        return Err(Error::InvalidK { k, n, min: m });
    }
    let quotas = strip_quotas(k, m)?;
    let per_axis = binomial(n - k + m - 1, m - 1);
    let mut matrices: u128 = 0;
    for qx in &quotas {
        for qy in &quotas {
            matrices = matrices.saturating_add(count_matrices(qx, qy));
        }
    }
    Ok(per_axis.saturating_mul(per_axis).saturating_mul(matrices))
}

/// Rank of every point along `axis`, ties by index.
fn axis_ranks(points: &PointSet, axis: usize) -> Vec<usize> {
    let mut order: Vec<usize> = (0..points.len()).collect();
    order.sort_by_key(|&i| (points.point(i)[axis], i));
    let mut rank = vec![0; points.len()];
    for (r, i) in order.into_iter().enumerate() {
        rank[i] = r;
    }
    rank
}

/// Strip index of each point given the cut positions.
fn strip_of(ranks: &[usize], cuts: &[usize], m: usize) -> Vec<usize> {
    let n = ranks.len();
    let mut by_rank = vec![0; n];
    let mut lo = 0;
    for (s, hi) in cuts.iter().copied().chain([n]).enumerate().take(m) {
        by_rank[lo..hi].fill(s);
        lo = hi;
    }
    ranks.iter().map(|&r| by_rank[r]).collect()
}

fn check_cuts(cuts: &[usize], m: usize, n: usize) -> Result<()> {
    if cuts.len() + 1 != m || cuts.windows(2).any(|w| w[0] > w[1]) || cuts.iter().any(|&c| c > n) {
        return Err(Error::InvalidParameter(format!(
            "cut positions {cuts:?} are not a nondecreasing (m-1)-tuple in [0, {n}]"
        )));
    }
    Ok(())
}

/// Cell `(i, j)` of every point under the cuts of `config`.
pub fn cell_assignment(points: &PointSet, config: &CellConfig) -> Result<Vec<(usize, usize)>> {
    Metric::L2.check_dim(points.dim())?;
    let (m, n) = (config.m(), points.len());
    check_cuts(&config.x_splits, m, n)?;
    check_cuts(&config.y_splits, m, n)?;
    let xs = strip_of(&axis_ranks(points, 0), &config.x_splits, m);
    let ys = strip_of(&axis_ranks(points, 1), &config.y_splits, m);
    Ok(xs.into_iter().zip(ys).collect())
}

/// The points a configuration selects, or `None` when some cell holds fewer
/// points than it is asked for. Points are ranked by their L1 coordinates
/// as given (rotate first for L∞).
pub fn select_for_config(points: &PointSet, config: &CellConfig) -> Result<Option<Vec<usize>>> {
    let m = config.m();
    let cells = cell_assignment(points, config)?;
    let mut out = Vec::new();
    for i in 0..m {
        for j in 0..m {
            let want = config.counts[i][j];
            if want == 0 {
                continue;
            }
            let order = directional_order(points, nabla_direction(i, j, m).components());
            let picked: Vec<usize> = order
                .into_iter()
                .filter(|&p| cells[p] == (i, j))
                .take(want)
                .collect();
            if picked.len() < want {
                return Ok(None);
            }
            out.extend(picked);
        }
    }
    out.sort_unstable();
    Ok(Some(out))
}

/// Shared per-instance data: ranks and the per-cell direction orders.
struct Prepared<'a> {
    points: &'a PointSet,
    m: usize,
    x_rank: Vec<usize>,
    y_rank: Vec<usize>,
    /// `orders[i * m + j]`: all points ranked by `nabla_direction(i, j)`.
    orders: Vec<Vec<usize>>,
}

/// x- or y-side of a configuration: quota vector plus cuts.
struct AxisChoice {
    quota: usize,
    cuts: Vec<usize>,
}

type Best = Option<(i128, Vec<usize>, (usize, usize, u64), CellConfig)>;

fn best_of(a: Best, b: Best) -> Best {
    match (a, b) {
        (Some(a), Some(b)) => {
            let b_wins = b.0 > a.0 || (b.0 == a.0 && (&b.1, b.2) < (&a.1, a.2));
            Some(if b_wins { b } else { a })
        }
        (a, None) => a,
        (None, b) => b,
    }
}

fn axis_choices(quotas: &[Vec<usize>], n: usize, k: usize, m: usize) -> Vec<AxisChoice> {
    let mut out = Vec::new();
    for (qi, q) in quotas.iter().enumerate() {
        // cuts = slack cuts shifted by the quota prefix sums, so strip s holds
        // at least q[s] points
        for slack in SplitTuples::new(n - k, m - 1) {
            let mut prefix = 0;
            let cuts = slack
                .iter()
                .enumerate()
                .map(|(s, &t)| {
                    prefix += q[s];
                    t + prefix
                })
                .collect();
            out.push(AxisChoice { quota: qi, cuts });
        }
    }
    out
}

impl Prepared<'_> {
    fn evaluate_row(
        &self,
        quotas: &[Vec<usize>],
        xi: usize,
        xc: &AxisChoice,
        ys: &[AxisChoice],
        k: usize,
        limits: &SearchLimits,
    ) -> Result<(Best, u64)> {
        let (m, n) = (self.m, self.points.len());
        let x_strip = strip_of(&self.x_rank, &xc.cuts, m);
        let qx = &quotas[xc.quota];
        let mut best: Best = None;
        let mut evaluated = 0u64;
        let mut cell = vec![0usize; n];
        let mut selection = Vec::with_capacity(k);

        for (yi, yc) in ys.iter().enumerate() {
            limits.check_deadline()?;
            let qy = &quotas[yc.quota];
            let y_strip = strip_of(&self.y_rank, &yc.cuts, m);
            let mut caps = vec![vec![0usize; m]; m];
            for p in 0..n {
                cell[p] = x_strip[p] * m + y_strip[p];
                caps[x_strip[p]][y_strip[p]] += 1;
            }
            // per cell, its points in selection order, as many as could be asked
            let members: Vec<Vec<usize>> = (0..m * m)
                .map(|c| {
                    let (i, j) = (c / m, c % m);
                    let limit = caps[i][j].min(qx[i]).min(qy[j]);
                    if limit == 0 {
                        return Vec::new();
                    }
                    self.orders[c]
                        .iter()
                        .copied()
                        .filter(|&p| cell[p] == c)
                        .take(limit)
                        .collect()
                })
                .collect();

            let mut seq = 0u64;
            let _ = for_each_count_matrix(qx, qy, Some(&caps), |counts| {
                selection.clear();
                for (c, list) in members.iter().enumerate() {
                    selection.extend_from_slice(&list[..counts[c / m][c % m]]);
                }
                selection.sort_unstable();
                let w = l1_weight_raw(self.points, &selection);
                let key = (xi, yi, seq);
                let improves = match &best {
                    None => true,
                    Some((bw, bsel, bkey, _)) => {
                        w > *bw || (w == *bw && (&selection, key) < (bsel, *bkey))
                    }
                };
                if improves {
                    let config = CellConfig {
                        x_splits: xc.cuts.clone(),
                        y_splits: yc.cuts.clone(),
                        counts: counts.to_vec(),
                    };
                    best = Some((w, selection.clone(), key, config));
                }
                seq += 1;
                ControlFlow::<()>::Continue(())
            });
            evaluated += seq;
        }
        Ok((best, evaluated))
    }
}

/// Runs the approximation scheme with `params.m` strips per axis.
///
/// L∞ runs on rotated points; L2 selects under L1 and reports the Euclidean
/// weight of that selection.
pub fn solve_ptas(points: &PointSet, k: usize, params: &PtasParams) -> Result<Solution> {
    let started = Instant::now();
    let (n, m) = (points.len(), params.m);
    if points.dim() != 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            found: points.dim(),
        });
    }
    if m < 3 {
        return Err(Error::InvalidParameter(format!(
            "m must be at least 3, got {m}"
        )));
    }
    if k < m || k > n {
        return Err(Error::InvalidK { k, n, min: m });
    }
    let metric = params.metric;
    let limits = &params.limits;

    let total = count_configurations(n, k, m)?;
    if total > limits.max_evaluations as u128 {
        return Err(Error::BudgetExceeded {
            what: "PTAS configuration enumeration",
            count: total,
            budget: limits.max_evaluations,
        });
    }

    let working: Cow<'_, PointSet> = match metric {
        Metric::Linf => Cow::Owned(rotate_linf_to_l1(points)?),
        _ => Cow::Borrowed(points),
    };
    let wp = working.as_ref();
    let prepared = Prepared {
        points: wp,
        m,
        x_rank: axis_ranks(wp, 0),
        y_rank: axis_ranks(wp, 1),
        orders: (0..m * m)
            .into_par_iter()
            .map(|c| directional_order(wp, nabla_direction(c / m, c % m, m).components()))
            .collect(),
    };
    let quotas = strip_quotas(k, m)?;
    let xs = axis_choices(&quotas, n, k, m);
    let ys = axis_choices(&quotas, n, k, m);

    let (best, evaluated) = xs
        .par_iter()
        .enumerate()
        .map(|(xi, xc)| prepared.evaluate_row(&quotas, xi, xc, &ys, k, limits))
        .try_reduce(
            || (None, 0),
            |(a, ea), (b, eb)| Ok((best_of(a, b), ea + eb)),
        )?;

    // the configuration with all cuts at the quota boundaries always fits
    let (w, indices, _, config) = best.expect("at least one feasible configuration");
    let weight = match metric {
        Metric::L1 | Metric::Linf => Weight::Exact(w),
        Metric::L2 => Weight::Approx(l2_weight_raw(points, &indices)),
    };
    Ok(Solution {
        algorithm: Algorithm::Ptas,
        metric,
        indices,
        weight,
        stats: SolveStats {
            candidates: n,
            configurations: evaluated,
            elapsed: started.elapsed(),
            ptas: Some(PtasReport {
                m,
                bound_fraction: bound_fraction(m)?,
                config,
            }),
            ..SolveStats::default()
        },
    })
}
