//! Exhaustive oracle and a greedy comparison heuristic.

use std::borrow::Cow;
use std::ops::Sub;
use std::time::Instant;

use crate::error::{Error, Result};
use crate::geometry::{
    l1_raw, l1_weight_raw, l2_raw, l2_weight_raw, rotate_linf_to_l1, Metric, PointSet, Weight,
};
use crate::search::{best_subset, Score, SearchLimits};
use crate::solution::{Algorithm, Solution, SolveStats};

fn check_k(points: &PointSet, k: usize, metric: Metric) -> Result<()> {
    let n = points.len();
    if k < 2 || k > n {
        return Err(Error::InvalidK { k, n, min: 2 });
    }
    metric.check_dim(points.dim())
}

/// Points the L1-type metrics are evaluated on: rotated for L∞.
fn l1_frame(points: &PointSet, metric: Metric) -> Result<Cow<'_, PointSet>> {
    Ok(match metric {
        Metric::Linf => Cow::Owned(rotate_linf_to_l1(points)?),
        _ => Cow::Borrowed(points),
    })
}

/// Scores every k-subset; returns the heaviest, lexicographically smallest
/// among ties. Fails if `C(n, k)` exceeds the default budget.
pub fn brute_force(points: &PointSet, k: usize, metric: Metric) -> Result<Solution> {
    brute_force_with(points, k, metric, &SearchLimits::default())
}

pub fn brute_force_with(
    points: &PointSet,
    k: usize,
    metric: Metric,
    limits: &SearchLimits,
) -> Result<Solution> {
    let started = Instant::now();
    check_k(points, k, metric)?;
    let pool: Vec<usize> = (0..points.len()).collect();
    let frame = l1_frame(points, metric)?;
    let (indices, weight, evaluated) = match metric {
        Metric::L1 | Metric::Linf => {
            let fp = frame.as_ref();
            let r = best_subset(&pool, k, |a, b| l1_raw(fp.point(a), fp.point(b)), limits)?;
            let w = l1_weight_raw(fp, &r.best);
            (r.best, Weight::Exact(w), r.evaluated)
        }
        Metric::L2 => {
            let r = best_subset(
                &pool,
                k,
                |a, b| l2_raw(points.point(a), points.point(b)),
                limits,
            )?;
            let w = l2_weight_raw(points, &r.best);
            (r.best, Weight::Approx(w), r.evaluated)
        }
    };
    Ok(Solution {
        algorithm: Algorithm::BruteForce,
        metric,
        indices,
        weight,
        stats: SolveStats {
            candidates: points.len(),
            subsets_evaluated: evaluated,
            elapsed: started.elapsed(),
            ..SolveStats::default()
        },
    })
}

trait GreedyScore: Score + Sub<Output = Self> {
    /// Whether `delta` is a real improvement on a total of `total`.
    fn is_gain(delta: Self, total: Self) -> bool;
}

impl GreedyScore for i128 {
    fn is_gain(delta: i128, _: i128) -> bool {
        delta > 0
    }
}

impl GreedyScore for f64 {
    fn is_gain(delta: f64, total: f64) -> bool {
        delta > 1e-12 * total.abs().max(1.0)
    }
}

struct Greedy<'a, S, F> {
    n: usize,
    k: usize,
    dist: &'a F,
    chosen: Vec<bool>,
    /// `gain[p]`: total distance from `p` to the chosen points.
    gain: Vec<S>,
    total: S,
}

impl<S: GreedyScore, F: Fn(usize, usize) -> S> Greedy<'_, S, F> {
    fn add(&mut self, p: usize) {
        self.total = self.total + self.gain[p];
        self.chosen[p] = true;
        for q in 0..self.n {
            self.gain[q] = self.gain[q] + (self.dist)(q, p);
        }
    }

    fn build(&mut self) {
        let mut pair = (0, 1);
        let mut far = (self.dist)(0, 1);
        for a in 0..self.n {
            for b in a + 1..self.n {
                let d = (self.dist)(a, b);
                if d > far {
                    far = d;
                    pair = (a, b);
                }
            }
        }
        self.add(pair.0);
        self.add(pair.1);
        for _ in 2..self.k {
            let next = (0..self.n)
                .filter(|&p| !self.chosen[p])
                .reduce(|a, b| if self.gain[b] > self.gain[a] { b } else { a })
                .expect("k <= n leaves a point to add");
            self.add(next);
        }
    }

    /// Best single swap `(out, in, delta)`, ties by smallest `out` then `in`.
    fn best_swap(&self) -> Option<(usize, usize, S)> {
        let mut best: Option<(usize, usize, S)> = None;
        for u in (0..self.n).filter(|&u| self.chosen[u]) {
            for v in (0..self.n).filter(|&v| !self.chosen[v]) {
                let delta = self.gain[v] - (self.dist)(u, v) - self.gain[u];
                if best.as_ref().is_none_or(|b| delta > b.2) {
                    best = Some((u, v, delta));
                }
            }
        }
        best
    }

    fn local_search(&mut self) -> u64 {
        let mut swaps = 0;
        while let Some((u, v, delta)) = self.best_swap() {
            if !S::is_gain(delta, self.total) {
                break;
            }
            self.chosen[u] = false;
            self.chosen[v] = true;
            self.total = self.total + delta;
            for q in 0..self.n {
                self.gain[q] = self.gain[q] + (self.dist)(q, v) - (self.dist)(q, u);
            }
            swaps += 1;
        }
        swaps
    }

    fn run(n: usize, k: usize, dist: &F) -> (Vec<usize>, u64) {
        let mut g = Greedy {
            n,
            k,
            dist,
            chosen: vec![false; n],
            gain: vec![S::ZERO; n],
            total: S::ZERO,
        };
        g.build();
        let swaps = g.local_search();
        ((0..n).filter(|&p| g.chosen[p]).collect(), swaps)
    }
}

/// Farthest pair, then repeated best insertion, then best-improvement
/// single swaps until none improves. Deterministic.
pub fn greedy_baseline(points: &PointSet, k: usize, metric: Metric) -> Result<Solution> {
    let started = Instant::now();
    check_k(points, k, metric)?;
    let n = points.len();
    let frame = l1_frame(points, metric)?;
    let (indices, weight, swaps) = match metric {
        Metric::L1 | Metric::Linf => {
            let fp = frame.as_ref();
            let (idx, swaps) = Greedy::run(n, k, &|a, b| l1_raw(fp.point(a), fp.point(b)));
            let w = l1_weight_raw(fp, &idx);
            (idx, Weight::Exact(w), swaps)
        }
        Metric::L2 => {
            let (idx, swaps) = Greedy::run(n, k, &|a, b| l2_raw(points.point(a), points.point(b)));
            let w = l2_weight_raw(points, &idx);
            (idx, Weight::Approx(w), swaps)
        }
    };
    Ok(Solution {
        algorithm: Algorithm::Greedy,
        metric,
        indices,
        weight,
        stats: SolveStats {
            candidates: n,
            swaps,
            elapsed: started.elapsed(),
            ..SolveStats::default()
        },
    })
}

/// A single swap `(out, in)` that strictly increases the exact weight of
/// `indices`, if one exists. L1 and L∞ only.
pub fn improving_swap(
    points: &PointSet,
    indices: &[usize],
    metric: Metric,
) -> Result<Option<(usize, usize)>> {
    points.check_subset(indices)?;
    if !metric.is_exact() {
        return Err(Error::InvalidParameter(
            "swap check needs an exact metric".into(),
        ));
    }
    let frame = l1_frame(points, metric)?;
    let base = l1_weight_raw(&frame, indices);
    let mut trial = indices.to_vec();
    for slot in 0..indices.len() {
        for v in (0..points.len()).filter(|v| !indices.contains(v)) {
            trial[slot] = v;
            if l1_weight_raw(&frame, &trial) > base {
                return Ok(Some((indices[slot], v)));
            }
        }
        trial[slot] = indices[slot];
    }
    Ok(None)
}
