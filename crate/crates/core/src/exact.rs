//! Exact maximum-weight k-subsets for fixed k.
//!
//! In an optimal k-subset, a point whose coordinate ranks within the subset
//! are `(i_1, .., i_d)` is maximal in direction `(2 i_a + 1 - k)_a` among
//! the points left out. Collecting the top k points in each of the `k^d`
//! such directions therefore yields a pool of at most `k^(d+1)` candidates
//! that contains an optimum, independent of `n`. The pool is then searched
//! exhaustively.

use std::borrow::Cow;
use std::time::Instant;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::{
    directional_topk, l1_raw, l1_weight_raw, l2_raw, l2_weight_raw, rotate_linf_to_l1, Direction,
    Metric, PointSet, Weight,
};
use crate::search::{best_subset, SearchLimits};
use crate::solution::{Algorithm, Solution, SolveStats};

/// The `k^d` directions `(2 i_1 + 1 - k, .., 2 i_d + 1 - k)` with
/// `0 <= i_a < k`, in lexicographic order of `(i_1, .., i_d)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DirectionFamily {
    pub k: usize,
    pub dim: usize,
    pub directions: Vec<Direction>,
}

impl DirectionFamily {
    pub fn len(&self) -> usize {
        self.directions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.directions.is_empty()
    }
}

pub fn enumerate_directions(k: usize, dim: usize) -> Result<DirectionFamily> {
    if k < 2 {
        return Err(Error::InvalidParameter(format!(
            "k must be at least 2, got {k}"
        )));
    }
    if dim == 0 {
        return Err(Error::InvalidParameter("dimension must be positive".into()));
    }
    let count = (k as u128).checked_pow(dim as u32).unwrap_or(u128::MAX);
    if count > u32::MAX as u128 {
        return Err(Error::InvalidParameter(format!(
            "{k}^{dim} directions is too many to enumerate"
        )));
    }
    let component = |i: usize| 2 * i as i64 + 1 - k as i64;
    let mut directions = Vec::with_capacity(count as usize);
    let mut digits = vec![0usize; dim];
    loop {
        directions.push(Direction::new(
            digits.iter().map(|&i| component(i)).collect(),
        ));
        // odometer, last axis fastest
        let mut axis = dim;
        loop {
            if axis == 0 {
                return Ok(DirectionFamily { k, dim, directions });
            }
            axis -= 1;
            digits[axis] += 1;
            if digits[axis] < k {
                break;
            }
            digits[axis] = 0;
        }
    }
}

/// Union of the top-k sets over all directions of the family, sorted.
pub fn candidate_union(points: &PointSet, k: usize) -> Result<Vec<usize>> {
    let n = points.len();
    if k < 2 || k > n {
        return Err(Error::InvalidK { k, n, min: 2 });
    }
    let family = enumerate_directions(k, points.dim())?;
    let selections = family
        .directions
        .par_iter()
        .map(|c| directional_topk(points, c, k))
        .collect::<Result<Vec<_>>>()?;
    let mut member = vec![false; n];
    for i in selections.into_iter().flatten() {
        member[i] = true;
    }
    Ok((0..n).filter(|&i| member[i]).collect())
}

/// Optimal k-subset under L1 or L∞ (via rotation), with the default
/// subset budget.
///
/// Under L2 the same L1 candidate pool is searched for the best Euclidean
/// weight; that result is heuristic.
pub fn solve_fixed_k(points: &PointSet, k: usize, metric: Metric) -> Result<Solution> {
    solve_fixed_k_with(points, k, metric, &SearchLimits::default())
}

pub fn solve_fixed_k_with(
    points: &PointSet,
    k: usize,
    metric: Metric,
    limits: &SearchLimits,
) -> Result<Solution> {
    let started = Instant::now();
    let n = points.len();
    if k < 2 || k > n {
        return Err(Error::InvalidK { k, n, min: 2 });
    }
    metric.check_dim(points.dim())?;
    let working: Cow<'_, PointSet> = match metric {
        Metric::Linf => Cow::Owned(rotate_linf_to_l1(points)?),
        _ => Cow::Borrowed(points),
    };

    let pool = candidate_union(&working, k)?;
    limits.check_deadline()?;
    let (indices, weight, evaluated) = match metric {
        Metric::L1 | Metric::Linf => {
            let wp = working.as_ref();
            let found = best_subset(&pool, k, |a, b| l1_raw(wp.point(a), wp.point(b)), limits)?;
            let w = l1_weight_raw(wp, &found.best);
            (found.best, Weight::Exact(w), found.evaluated)
        }
        Metric::L2 => {
            let found = best_subset(
                &pool,
                k,
                |a, b| l2_raw(points.point(a), points.point(b)),
                limits,
            )?;
            let w = l2_weight_raw(points, &found.best);
            (found.best, Weight::Approx(w), found.evaluated)
        }
    };

    Ok(Solution {
        algorithm: Algorithm::FixedK,
        metric,
        indices,
        weight,
        stats: SolveStats {
            candidates: pool.len(),
            subsets_evaluated: evaluated,
            elapsed: started.elapsed(),
            ..SolveStats::default()
        },
    })
}
